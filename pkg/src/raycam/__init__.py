"""raycam: universal camera-geometry toolkit.

Parametric camera models with projection/unprojection, spherical-harmonics
ray-field fitting and reconstruction, a fully spherical 3D output space,
quantile-based angular losses with analytic gradients, evaluation metrics,
and depth-guided softmax-splatting camera augmentation.
"""

__version__ = "0.1.0"

from .cameras import (
    CAMERA_FAMILIES,
    Camera,
    CameraError,
    CameraSamplingSpec,
    DoubleSphere,
    EUCM,
    Equirectangular,
    FamilySpec,
    Fisheye624,
    KannalaBrandt,
    Mei,
    Pinhole,
    UCM,
    UnknownModelError,
    augmentation_sampling_spec,
    load_camera_json,
    project,
    ray_field,
    sample_camera,
    unproject,
    validation_sampling_spec,
)
from .losses import (
    LossConfig,
    LossValue,
    asymmetric_angular_loss,
    combined_angular_loss,
    confidence_loss,
    curriculum_probability,
    fd_gradcheck,
    radial_loss,
    total_loss,
)
from .metrics import (
    EvalConfig,
    MetricsReport,
    delta_metrics,
    evaluate,
    f_auc,
    fscore,
    nn_distances,
    nn_distances_bruteforce,
    rho_auc,
    ssi_align,
    standard_suite,
)
from .shfield import (
    SHBasis,
    SHCoefficients,
    SHDomain,
    base_grid,
    base_rays,
    estimate_domain,
    eval_basis,
    fit_coeffs,
    load_coefficients_json,
    real_sph_harm,
    reconstruct,
)
from .spherical import (
    AngularField,
    ConfidenceMap,
    DepthMap,
    PointCloud,
    RadiusMap,
    RayField,
    ShapeMismatchError,
    angles_to_rays,
    cartesian_to_spherical,
    depth_to_radius,
    radius_to_depth,
    rays_to_angles,
    spherical_to_cartesian,
)
from .tensorio import read_mask, read_tensor, write_mask, write_tensor
from .warp import (
    DeformationField,
    DistortedSample,
    deformation_field,
    make_distorted_sample,
    normalized_inverse_depth,
    softmax_splat,
)
