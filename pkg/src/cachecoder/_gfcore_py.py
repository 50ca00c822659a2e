"""Pure-Python fallback for the bulk GF(2^m) stream kernels.

Same signatures as the compiled `_gfcore` extension.  Streams are
'H'-typecode arrays (or uint16 memoryviews); `exp` is the doubled
antilog table and `log` the int32 log table built by `gf.FieldSpec`.
"""

BACKEND = "pure"


def xor_into(dst, src):
    """dst[i] ^= src[i] over the length of src."""
    for i in range(len(src)):
        dst[i] ^= src[i]


def axpy_into(dst, c, src, exp, log):
    """dst[i] ^= c * src[i] over the length of src (c scalar)."""
    if c == 0:
        return
    lc = log[c]
    for i in range(len(src)):
        s = src[i]
        if s:
            dst[i] ^= exp[lc + log[s]]


def scale_into(dst, c, exp, log):
    """dst[i] = c * dst[i] in place."""
    if c == 0:
        for i in range(len(dst)):
            dst[i] = 0
        return
    if c == 1:
        return
    lc = log[c]
    for i in range(len(dst)):
        s = dst[i]
        if s:
            dst[i] = exp[lc + log[s]]
