"""Kernel backend selection.

Imports the compiled extension when it was built, otherwise falls back to
the pure-numpy implementation. Both expose the same two functions with
bit-identical results; ``backend()`` reports which one is active.
"""

try:
    from symscene import _kernels as _impl

    COMPILED = True
except ImportError:
    from symscene import _kernels_py as _impl

    COMPILED = False

nms_keep = _impl.nms_keep
iou_matrix = _impl.iou_matrix


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return _impl.BACKEND
