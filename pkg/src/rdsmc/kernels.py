"""Hot-kernel facade: compiled extension if available, pure Python otherwise."""

try:
    from . import _ckernels as _impl
except ImportError:  # extension not built
    from . import _pykernels as _impl

BACKEND = _impl.BACKEND
mc_path = _impl.mc_path
count_cycles = _impl.count_cycles
cftp_many = _impl.cftp_many
