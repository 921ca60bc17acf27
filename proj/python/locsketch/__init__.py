"""Python bindings for the locsketch C++ core."""

from ._core import (
    aduaf_recover,
    crt_decode,
    crt_encode,
    fold,
    generate_catalog,
    rs_decode,
    rs_encode,
    theory_trial,
)

__all__ = [
    "aduaf_recover",
    "crt_decode",
    "crt_encode",
    "fold",
    "generate_catalog",
    "rs_decode",
    "rs_encode",
    "theory_trial",
]
