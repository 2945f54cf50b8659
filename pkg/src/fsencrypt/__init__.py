"""Finite-state encryption of individual sequences: LZ complexity, secure
compress-then-pad schemes, exhaustive machine verifiers and key-rate bounds."""

from .bits import BitReader, BitString, BitWriter
from .bounds import (BoundsReport, block_entropy_rate, build_block_shannon_fsm,
                     check_compressor_length_bound, delta_bound, sigma_lower_bound)
from .condlz import cond_decode, cond_encode, conditional_lz_complexity, joint_parse
from .errors import (AlphabetError, FSEError, GuardExceededError, KeyExhaustedError,
                     MalformedStreamError, RateOverflowError)
from .fsm import (EncrypterSpec, KeyTape, check_information_lossless, check_perfect_secrecy,
                  dump_spec, key_rate, load_spec, run)
from .lossy import DistortionMeasure, RdPoint, hamming, nil_uncertainty_rate, rd_heuristic, rd_oracle
from .lz78 import lz78_decode, lz78_encode, lz_complexity, parse, phrase_count
from .schemes import (BinAssignment, Cryptogram, Mode, binned_decrypt, binned_encrypt,
                      cond_otp_decrypt, cond_otp_encrypt, fixed_rate_decrypt, fixed_rate_encrypt,
                      otp_lz_decrypt, otp_lz_encrypt)

__version__ = "0.1.0"
