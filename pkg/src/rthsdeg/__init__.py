"""Virtual real-time hybrid simulation testbed for a degrading base-isolated building."""
from .control import ControllerConfig, matched_ff_zero, nrms_tracking_error
from .degradation import (
    DegObservation, DegradationModel, SpecimenSampler, fit_power_law, sample_specimen,
    stiffness_at,
)
from .engine import (
    EngineConfig, EngineInstability, GroundMotion, SimulationRecord, resample_motion,
    run_monolithic_reference, run_rths, simulate_fixed_base,
)
from .metrics import (
    MetricsReport, Thresholds, check_failure, compute_metrics, transmissibility_curve,
    transmissibility_scalar,
)
from .motion import MotionSpec, generate_kanai_tajimi, load_ground_motion_csv
from .plant import ActuatorModel, BoucWenIsolator, LoadCellModel, VirtualPlant
from .reliability import (
    CampaignConfig, Scenario, TTFSample, WeibullFit, fragility_curve, goodness_of_fit, mttf,
    run_campaign, time_to_failure, weibull_mle,
)
from .structure import BuildingModel, assemble_isolated

__version__ = "0.1.0"
