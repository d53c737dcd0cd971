"""Minimax-regret project choice between a principal and an informed agent."""

from .core import (FEAS_EPS, MULTI, PARTIAL, SINGLE, DomainError, Env,
                   EpisodeReport, InputError, Mechanism, Params, Project,
                   ProjectSet, SubProb, best_response, episode, is_ic_on,
                   load_type_set, parse_type_set, regret)
from .single import (ApprovalMechanism, SingleMechanism, alpha_single, r_single,
                     single_choice)
from .multi import (LpSolution, PMPMechanism, alpha_multi, gamma, pmp_choice,
                    pmp_choice_mm2, r_multi_closed, r_multi_numeric, u_bar, u_low)
from .lp import Row, lp2_solve
from .extensions import (KEnv, PartialCommitmentMechanism, StrictPMPMechanism,
                         k_episode, partial_commitment_choice, strict_alpha,
                         two_project_proposal)
from .adversary import (SearchSpec, WcrCertificate, lower_bound_multi,
                        lower_bound_single, wcr_search)

__version__ = "0.1.0"
