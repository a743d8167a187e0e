"""Secure rank-metric coset coding with bandwidth-efficient staircase decoding."""

from .channels import (ChannelRealization, CoherentChannelSpec, CrisscrossSpec, column_select,
                       crisscross_dominance_check, crisscross_weight, crisscross_weight_bruteforce,
                       sample_crisscross_error, sample_erasure_matrix, sample_rank_error, transmit)
from .codes import (BudgetExceeded, CodePair, DecodingFailure, GabidulinCode, LinearCode,
                    ProductCode, decode_coherent, decode_coherent_bruteforce, dual_code, gabidulin,
                    gabidulin_pair, min_rank_distance_bruteforce, product_code,
                    relative_min_rank_distance_bruteforce)
from .coset import (LeakageReport, NestedScheme, check_security_linear, mutual_information_exhaustive,
                    nested_decode, nested_encode)
from .fields import (BaseMatrix, ExtMatrix, FieldTower, contract_phi, expand_phi, make_tower,
                     matmul_mixed, rank_q)
from .kernels import BACKEND
from .staircase import (StaircasePlan, StaircaseScheme, bound_co, bound_info_rate, decode_efficient,
                        decode_full, overhead, plan, preprocess, staircase_encode)

__version__ = "0.1.0"
