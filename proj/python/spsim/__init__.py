"""Grid membrane-system simulation engine.

Models are written in a small declarative language (see models/*.spm) and
compiled into opaque handles; system states travel as JSON strings so every
operation here is a pure function of its arguments.
"""

try:
    from ._spsim import (  # type: ignore[attr-defined]
        BoneParams,
        Model,
        SpError,
        __version__,
        canonical_program,
        check_step,
        density_to_csv,
        is_quiescent,
        load_model,
        macro,
        macro_text,
        micro,
        micro_text,
        parse_density_csv,
        render_density,
        resume,
        run,
        run_coupled,
        step,
    )
except ImportError:  # build tree: extension sits next to the package dir
    from _spsim import (  # type: ignore[no-redef]
        BoneParams,
        Model,
        SpError,
        __version__,
        canonical_program,
        check_step,
        density_to_csv,
        is_quiescent,
        load_model,
        macro,
        macro_text,
        micro,
        micro_text,
        parse_density_csv,
        render_density,
        resume,
        run,
        run_coupled,
        step,
    )

__all__ = [
    "BoneParams",
    "Model",
    "SpError",
    "__version__",
    "canonical_program",
    "check_step",
    "density_to_csv",
    "is_quiescent",
    "load_model",
    "macro",
    "macro_text",
    "micro",
    "micro_text",
    "parse_density_csv",
    "render_density",
    "resume",
    "run",
    "run_coupled",
    "step",
]
