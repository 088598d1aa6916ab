"""Python interface to the Dean-Kawasaki verification lab."""

from ._dklab import (
    AtomicMeasure,
    ColeHopf,
    HeatEvaluator,
    MCEstimate,
    ParseError,
    ParticleEnsemble,
    PreconditionError,
    Rectangle,
    TestFunction,
    UnsupportedError,
    VerificationReport,
    blowup_scan,
    compact_bump,
    constant,
    gaussian_bump,
    generating_function_test,
    kappa,
    laplace_duality_test,
    run_config,
    selftest,
    sqrt_log_atoms,
)

__all__ = [name for name in dir() if not name.startswith("_")]
