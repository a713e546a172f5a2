"""Bass/SI spreading on networks: simulation, exact expressions and a small-network oracle."""

from .errors import (CapacityError, ConfigError, NoCrossingError, ParameterError, ParityError,
                     ShapeError, SpreadNetError)
from .network import (Graph, NetworkInstance, SpreadParams, Trajectory, make_dreg_instance,
                      make_er_instance, make_instance, read_edgelist, write_edgelist)
from .graphgen import (Family, count_cycles_through, cycle_counts_all, gen_cartesian_torus,
                       gen_complete, gen_cycle, gen_dregular, gen_er, gen_isolated)
from .sim import (EnsembleResult, conditional_susceptibility_by_degree, ensemble, simulate,
                  simulate_many)
from .analytic import (f_1d, f_compartmental, f_isolated, final_infection_level, giant_component,
                       half_life, solve_dreg, solve_er)
from .oracle import exact_marginals, exact_pair_survival, funnel_check, indifference_check

__version__ = "0.1.0"
