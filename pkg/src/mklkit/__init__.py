"""Multiple kernel learning: base kernels, lazy kernel lists, MKL algorithms and metrics."""
from .core import (Dataset, KernelList, MaterializedKernelList, check_labels, combine,
                   validate_gram)
from .generators import (BooleanGenerator, HPKGenerator, boolean_generator, hpk_generator,
                         lazy_list, materialize, meter_report, reset_meter)
from .kernels import (KernelSpec, compute_list, compute_test_list, hpk, linear_kernel,
                      monotone_conjunctive_kernel, monotone_disjunctive_kernel,
                      p_spectrum_kernel, parse_specs)
from .metrics import (alignment, centered_alignment, frobenius_norm, margin,
                      normalize_kernel, radius, spectral_ratio, trace_norm)
from .mkl import (GRAM, KOMD, AverageMKL, Callback, EasyMKL, MKLModel, TraceRecorder,
                  average_mkl_fit, easymkl_fit, gram_fit, komd_fit, predict)
from .solvers import SimplexQP, project_simplex, solve

__version__ = "0.1.0"
