"""Python bindings for the URLNet classifier."""
import json

from ._urlnet import (
    DataError,
    Error,
    Model,
    NumericError,
    UsageError,
    roc_auc,
    run_cli,
    synthetic_corpus,
    tokenize_words,
    tpr_at_fpr,
)

__all__ = [
    "DataError",
    "Error",
    "Model",
    "NumericError",
    "UsageError",
    "cli",
    "model_config",
    "roc_auc",
    "run_cli",
    "synthetic_corpus",
    "tokenize_words",
    "tpr_at_fpr",
]


def cli(*args):
    """Runs a urlnet subcommand; raises Error with its stderr on a nonzero exit."""
    code, out, err = run_cli([str(a) for a in args])
    if code != 0:
        raise Error(f"urlnet {args[0] if args else ''} exited {code}: {err.strip()}")
    return out


def model_config(model):
    return json.loads(model.config_json)
