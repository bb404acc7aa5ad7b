"""
Constants and configuration for the SALT fluid laboratory.
"""

import math
from enum import Enum, IntEnum

# Spatial domain: the flat torus [0, 2*pi)^2
DOMAIN_LENGTH = 2.0 * math.pi
GRID_MIN_POINTS = 8

# Fraction of the resolved band kept by the dealiasing mask (2/3 rule)
DEALIAS_FRACTION = 1.0 / 3.0

# Noise basis defaults
DEFAULT_NOISE_GAMMA = 2.0
DEFAULT_NOISE_AMPLITUDE = 0.1
DEFAULT_NOISE_KMAX = 4

# Rotating shallow water defaults
DEFAULT_EPSILON = 0.1
DEFAULT_FROUDE = 1.0
DEFAULT_CORIOLIS = 1.0
DEFAULT_MEAN_DEPTH = 1.0

# Ornstein-Uhlenbeck driver defaults
DEFAULT_OU_THETA = 1.0
DEFAULT_OU_SIGMA = 1.0

# Stochastic Heun stepper
DEFAULT_CORRECTOR_ITERATIONS = 1

# Advisory CFL: (max|u| dt + max|xi| median|dW|) / h must stay below this
CFL_LIMIT = 0.5

# Tolerances shared by invariants and checks
DIVERGENCE_TOLERANCE = 1e-10
CURL_R_TOLERANCE = 1e-10
GRID_NODE_TOLERANCE = 1e-9

# Fundamental-lemma harness: final error must fall below first / this factor
LEMMA_REDUCTION_FACTOR = 10.0

# Particle counts are capped at desk scale
MAX_PARTICLES = 1000

# Binary formats
PATH_MAGIC = b"SMDP"
PATH_VERSION = 1
SNAPSHOT_MAGIC = b"SFLD"
SNAPSHOT_VERSION = 1

# Random stream tags, so distinct samplers never share draws for one seed
STREAM_BROWNIAN = 0
STREAM_OU = 1
STREAM_BRIDGE = 2
STREAM_INITIAL = 3
STREAM_PARTICLES = 4


class ComponentKind(Enum):
    """Role of a driving-path component in the Doob-Meyer split."""

    FINITE_VARIATION = ("finite-variation", "FV")
    MARTINGALE = ("martingale", "M")

    def __init__(self, label: str, code: str):
        self.label = label
        self.code = code


class Phase(Enum):
    """Spatial profile of a noise mode."""

    COS = ("cos", "c")
    SIN = ("sin", "s")
    CONST = ("const", "k")

    def __init__(self, label: str, code: str):
        self.label = label
        self.code = code

    @classmethod
    def from_label(cls, label: str) -> "Phase":
        for phase in cls:
            if phase.label == label:
                return phase
        raise KeyError(label)


class Formulation(Enum):
    """Prognostic variable of the incompressible solver."""

    VORTICITY = ("vorticity", "omega")
    VELOCITY = ("velocity", "u")

    def __init__(self, label: str, code: str):
        self.label = label
        self.code = code


class Mode(Enum):
    """Run modes of the batch driver."""

    EULER_VORTICITY = ("euler-vorticity", "SALT Euler, vorticity form")
    EULER_VELOCITY = ("euler-velocity", "SALT Euler, velocity form with semimartingale pressure")
    RSW = ("rsw", "stochastic rotating shallow water, curl form")
    ADVECTION_TEST = ("advection-test", "scalar/density transport and KIW residual")
    SDE_CONVERGENCE = ("sde-convergence", "strong convergence of the Stratonovich Heun stepper")
    LEMMA_CHECK = ("lemma-check", "stochastic fundamental lemma harness")

    def __init__(self, label: str, description: str):
        self.label = label
        self.description = description

    @classmethod
    def from_label(cls, label: str) -> "Mode":
        for mode in cls:
            if mode.label == label:
                return mode
        raise KeyError(label)


class DriverKind(Enum):
    """Martingale part of the driving semimartingale."""

    BROWNIAN = "brownian"
    OU = "ou"


class InitialKind(Enum):
    """Named initial conditions."""

    TAYLOR_GREEN = "taylor-green"
    RANDOM = "random"
    REST = "rest"
    BALANCED = "balanced"
    ZERO = "zero"


class ExitCode(IntEnum):
    """Process exit codes of the command-line driver."""

    OK = 0
    CONFIG_ERROR = 2
    SOLVER_ABORT = 3
    CHECK_FAILURE = 4


# Diagnostics CSV columns per family
EULER_COLUMNS = (
    "step",
    "time",
    "energy",
    "enstrophy",
    "casimir4",
    "div_rms",
    "p0_norm",
    "pk_norm_total",
)
RSW_COLUMNS = ("step", "time", "mass", "energy", "pv_min", "pv_max", "eta_min")
TRAJECTORY_COLUMNS = ("step", "time", "particle_id", "x", "y", "a_value", "residual")
ADVECTION_COLUMNS = ("step", "time", "kiw_residual", "scalar_min", "scalar_max", "density_mass")
SDE_COLUMNS = ("level", "dt", "strong_error")
LEMMA_COLUMNS = ("m", "width", "error")

# Artifact names inside a run directory
MANIFEST_FILE = "manifest.json"
DIAGNOSTICS_FILE = "diagnostics.csv"
TRAJECTORY_FILE = "trajectories.csv"
PATH_FILE = "path.smdp"
STUDY_FILE = "study.json"
SNAPSHOT_PATTERN = "snapshot_{step:06d}.sfld"
MEMBER_PATTERN = "member_{index:03d}"
