import numpy as np
import pytest

from radhar.synth import Blob, BlobFieldSpec, synth_blob_sequence


def drifting_blob_spec(dropout=(), frames=40, **kw):
    """Primary blob on row 20 moving 2 px/frame right, three lighter clutter blobs far below.

    The clutter keeps every frame's score under the default acceptance
    threshold, so the tracker has to rely on gating.
    """
    return BlobFieldSpec(
        (96, 128),
        [Blob((20.0, 20.0), 3.0, 1.0)],
        clutter_lumps=[Blob((75.0, c), 3.0, 0.8) for c in (20.0, 64.0, 108.0)],
        frames=frames,
        velocity_px=(0.0, 2.0),
        dropout_frames=frozenset(dropout),
        **kw,
    )


@pytest.fixture
def drifting_sequence():
    def make(dropout=()):
        return synth_blob_sequence(drifting_blob_spec(dropout))
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts collected by test_acceptance.py, one line each."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
