from .problems import FourthOrderProblem, SecondOrderProblem, check_interval, rhs2, rhs4
from .trajectory import StepStats, Trajectory, fields_at
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, DEFAULT_STEPS_PER_SPAN, integrate
