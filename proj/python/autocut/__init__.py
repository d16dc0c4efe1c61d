"""Automatic shot-level video editing: segmentation, imitation-learned
shot selection and transition-histogram evaluation."""

from ._autocut import (
    PcaModel,
    __version__,
    detect_boundaries,
    histogram_rms,
    run_cli,
    segment_file,
    state_size,
    style_report,
    synth,
    transition_histogram,
)

__all__ = [
    "PcaModel",
    "__version__",
    "detect_boundaries",
    "histogram_rms",
    "main",
    "run_cli",
    "segment_file",
    "state_size",
    "style_report",
    "synth",
    "transition_histogram",
]


def main(argv=None):
    """Console entry point with the same interface as the C++ tool."""
    import sys

    args = sys.argv[1:] if argv is None else list(argv)
    code, out, err = run_cli(args)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
