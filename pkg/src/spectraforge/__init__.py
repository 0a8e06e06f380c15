"""Shape reconstruction and manipulation from Laplacian spectra.

The package turns triangle meshes and point clouds into compact spectral
encodings (eigenvalue differences of global and localized Laplacians),
trains a dense decoder that maps encodings back to vertex positions, and
exposes segment-level editing (swap, interpolation) plus evaluation
metrics, a CLI, and an HTTP inference service.
"""

__version__ = "1.0.0"

from .cube import CubeSpec, Dataset, generate_cube, generate_cube_dataset, load_dataset, save_dataset
from .decoder import (
    DecoderModel,
    TrainConfig,
    init_decoder,
    load_checkpoint,
    load_checkpoint_file,
    reconstruct,
    save_checkpoint,
    save_checkpoint_file,
    train,
)
from .eigen import EigenError, Spectrum, dense_eigen_oracle, smallest_eigenpairs
from .encoding import (
    EncodingStats,
    Segment,
    SpectralEncoding,
    build_encoding,
    dataset_stats,
    diff_encode,
    interpolate,
    load_encoding,
    save_encoding,
    swap_segments,
)
from .metrics import EvalReport, align_error, area_error, enn_baseline, metric_distortion, mse
from .operators import (
    MassMatrix,
    SparseOperator,
    cotan_laplacian,
    default_tau,
    dirichlet_reduce,
    ham_operator,
    lmh_operator,
    pat_operator,
    pointcloud_laplacian,
)
from .pipeline import compute_encoding, encode_dataset, evaluate_on_dataset, train_on_dataset
from .shapes import (
    Mesh,
    ParseError,
    PointCloud,
    Region,
    ShapeError,
    extract_submesh,
    farthest_point_sample,
    grid_mesh,
    icosphere,
    load_mesh,
    load_pointcloud,
    load_region,
    save_mesh,
    save_region,
)

__all__ = [name for name in dir() if not name.startswith("_")]
