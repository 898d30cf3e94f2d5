from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class SolverBudget:
    """Knobs shared by every search routine.

    samples      sphere points used for the sup in C_n^alpha
    starts       random restarts per local search
    iterations   cap on inner iterations (direction refinement, ascent steps)
    resolution   boundary grid size for the 2D oracle
    angular      angular grid size for 2D min-slice refinement
    directions   extra random separation directions for the polytopal LP
    margin       separation margin for the Hahn-Banach step
    seed         master seed; every derived stream is keyed by a counter
    workers      thread count; results never depend on it
    max_dim      dimension cap for exact vertex enumeration
    """

    samples: int = 64
    starts: int = 6
    iterations: int = 60
    resolution: int = 512
    angular: int = 720
    directions: int = 24
    margin: float = 1e-4
    seed: int = 0
    workers: int = 1
    max_dim: int = 8

    def with_(self, **kw):
        return replace(self, **kw)

    def as_dict(self):
        return asdict(self)


DEFAULT_BUDGET = SolverBudget()
