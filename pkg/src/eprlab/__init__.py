"""Numerical laboratory for EPR polarization-correlation models."""

__version__ = "0.1.0"

from .errors import (ConfigurationError, EprLabError, InsufficientDataError, InvalidInputError,
                     InvalidModelError, ScenarioError, UnsupportedAnalysisError)
from .polarization import (Angle, CascadeSpec, FieldAmplitude, apply_polarizer,
                           cascade_intensity_fraction, conditional_probability)
from .quadrature import QuadratureSettings
from .models import (ComplexField, JointTable, LhvModelSpec, SetupOffset, default_lhv_spec,
                     furry_probability, joint_outcome_table, kracklauer_normalized, lhv_correlation,
                     phase_linked_integral, phase_linked_probability)
from .montecarlo import (DetectionRecord, DetectionStream, PairEvent, RunPlan, StationConfig,
                         generate_pairs, measure_factorized, measure_joint, run_experiment)
from .coincidence import (CoincidencePair, CoincidenceSet, CoincidenceWindow, JitterModel,
                          accidental_fraction, apply_jitter, match_coincidences, pair_by_tag)
from .bell import (PRESETS, AnglePreset, ChshResult, CorrelationCurve, CorrelationEstimate,
                   bell1964_check, chsh, chsh_analytic, chsh_from_data, correlation_curve,
                   estimate_correlation)
from .scenario import Scenario, load_scenario
from .runner import RunManifest, run
