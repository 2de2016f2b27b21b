"""Forest fire with a single lightning source on Z+ and on finite graphs.

Monte Carlo sampling of burnout times, exact moment and MGF evaluation,
the Dickman-type limit law and an exponential tail bound for the first
burnout time of a distant vertex.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BudgetError,
    DomainError,
    EmptyRequestError,
    ForestFireError,
    PrecisionError,
    QuadratureError,
)
from .exact import (  # noqa: E402
    A,
    A_limit_gap,
    FactoredMGF,
    a,
    eval_factored,
    harmonic,
    harmonic_asymptotic,
    mean_tau,
    mean_tau_exact,
    mgf,
    second_moment_tau,
    u_factored,
    u_recursive,
    variance_tau,
)
from .graph import GraphSpec, spans  # noqa: E402
from .simulator import (  # noqa: E402
    BurnStream,
    Burnt,
    Censored,
    FirstBurnouts,
    RngHandle,
    couple,
    first_burnouts,
    propagate,
    sample_site0,
    sample_tau,
    sample_tau_replicas,
    simulate_graph_fire,
)
from .special import (  # noqa: E402
    DickmanTable,
    GD1Spec,
    build_dickman_table,
    dickman_cdf,
    dickman_density,
    dickman_rho,
    dickman_table,
    expint_E1,
    expint_Ei,
    gd1_cdf,
    gd1_sample,
    limit_mgf,
)
from .stats import SampleSummary, SurvivalCurve, empirical_survival, ks_statistic, summarize  # noqa: E402
from .tailbound import (  # noqa: E402
    TailBoundParams,
    ThetaEstimate,
    estimate_theta,
    lambert_w0,
    phi_nu,
    solve_lambda,
    t_max,
    tail_bound,
)
