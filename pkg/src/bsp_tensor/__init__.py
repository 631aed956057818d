"""Bulk Synchronous Parallel simulator and tensor products of linear BSP algorithms."""
from .core import (Distribution, MultiIndex, ProcessorGrid, Shape, StridedView, cyclic_global,
                   cyclic_local, product_grid, strided_read)
from .engine import (CommReport, DistributedArray, PutRecord, comm_volume, exec_communication,
                     exec_computation, run)
from .errors import ContractError, DivisibilityError, ScheduleError, StructureError
from .linear_bsp import (CommunicationStep, ComputationStep, LinearBspAlgorithm, StepKind,
                         apply_global, as_local_matrix, as_matrix, step_matrix, validate)
from .tensor import pad_identity, tensor, tensor_communication, tensor_computation
from .transforms import (dct_comm_maps, local_dft, make_dct2_rank1, make_dct2_rankd,
                         make_fft_rank1, make_fft_rankd, make_fft_rankd_reference)

__version__ = "0.1.0"
