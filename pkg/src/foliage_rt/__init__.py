"""Stochastic foliage models and single-bounce mmWave channel simulation."""

from .channel import (
    Material,
    PathContribution,
    ScatterModel,
    Scene,
    build_scene,
    fresnel_normal_reflection,
    fspl_db,
    trace_paths,
)
from .foliage import CrownParams, FoliageModel, generate_foliage, make_envelope, scatterer_template
from .geometry import Bvh, Ray, TriSoupMesh, bvh_build, bvh_intersect, mesh_volume, point_in_mesh, rodrigues
from .metrics import (
    Cir,
    ChannelStats,
    Pdp,
    assemble_cir,
    channel_stats,
    empirical_cdf,
    path_loss_db,
    pdp_from_realizations,
    rms_delay_spread,
)
from .runner import ExperimentConfig, SweepResult, calibrate, emit_outputs, run_sweep

__version__ = "0.1.0"
