"""Channel and power allocation for two-user NOMA downlinks, solved as an
Ising problem on a simulated coherent Ising machine, with reference solvers
and experiment drivers."""

__version__ = "0.1.0"

from .assignment import Assignment
from .baselines import (SaConfig, cnoma_solve, es_solve, hopfield_solve, oma_solve,
                        random_solve, sa_solve)
from .cim import CimConfig, CimTrace, attain_rate, simulate
from .config import RadioConfig
from .encoding import (DEFAULT_SCALING, IsingProblem, NetworkWeights, build_energy_terms,
                       decode, derive_weights, encode, ising_energy, nn_energy, to_ising)
from .errors import (InfeasibleQoS, InvalidAssignment, NomaError, NumericalDivergence,
                     ProblemTooLarge)
from .exhaustive import exhaustive_search
from .pipeline import MethodOptions, SolveResult, run_pipeline, sweep, timing_bench
from .power import pair_power_split, water_fill
from .radio import (CnrMatrix, RateTable, Scenario, allocate_power, build_rate_table,
                    compute_cnr, generate_scenario, total_rate)
