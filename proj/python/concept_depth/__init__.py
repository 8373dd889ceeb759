"""Layer-wise linear probing and concept-depth metrics."""

import json as _json

from ._core import (  # noqa: F401
    Error,
    IoError,
    ProbeConfig,
    ProbeModel,
    ValidationError,
    accuracy,
    anchor_accuracies,
    auc,
    bayes_accuracy,
    converging_point,
    dataset_names,
    depth_metrics,
    f1_score,
    fit,
    gradient,
    jumping_point,
    known_layer_count,
    load_run,
    objective,
    perturb,
    perturb_prompts,
    predict,
    read_labels,
    read_layer,
    render_prompt,
    run_pipeline_json,
    sigmoid,
    split,
    variation_rate,
    write_labels,
    write_layer,
)
from ._core import synth_generate as _synth_generate


def synth_generate(profile, out_dir):
    """Write a synthetic run directory from a profile dict."""
    _synth_generate(_json.dumps(profile), str(out_dir))


def run_pipeline(run_dir, config=None, parallelism=1, per_layer_split=False):
    """Probe every layer of a run and return the report as a dict."""
    text = run_pipeline_json(
        str(run_dir),
        config if config is not None else ProbeConfig(),
        parallelism,
        per_layer_split,
        "json",
    )
    return _json.loads(text)


__version__ = "0.1.0"
