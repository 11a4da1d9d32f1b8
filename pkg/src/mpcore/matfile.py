"""Text serialization for matrices and vectors (.mpmat).

Layout: one header line

    mpmat <rows> <cols> <scalar-tag> <precision-bits>

followed by exactly <rows> lines, one matrix row per line, entries in
row-major order separated by single spaces. scalar-tag is dd, td, qd, or
bf. Multi-component entries are written as k hex-float components per
entry (binary64 hex, as produced by float.hex), so a row line carries
cols*k tokens; BigFloat entries are one big hex-float token each
(0x1.<hex>p<exp> with sign prefix). Round trips are bit-exact.
"""

from .bigfloat import PrecisionContext, bf_format_hex, bf_parse_hex
from .errors import ParseError
from .linalg import BfDomain, DenseMatrix, McDomain, Vector
from .mcfloat import MultiComp, PrecisionTag

__all__ = ["save_matrix", "save_vector", "load_matrix", "load_vector"]

MAGIC = "mpmat"


def _header(domain, rows, cols):
    if domain.kind == "mc":
        tag, bits = domain.name, domain.tag.bits
    else:
        tag, bits = "bf", domain.ctx.p
    return "%s %d %d %s %d" % (MAGIC, rows, cols, tag, bits)


def _entry_tokens(domain, raw):
    if domain.kind == "mc":
        return [c.hex() for c in raw]
    return [bf_format_hex(raw)]


def _write(path, domain, rows, cols, row_iter):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_header(domain, rows, cols) + "\n")
        for row in row_iter:
            toks = []
            for raw in row:
                toks.extend(_entry_tokens(domain, raw))
            fh.write(" ".join(toks) + "\n")


def save_matrix(path, A):
    """Write a DenseMatrix; the result reloads bit-exactly."""
    _write(path, A.domain, A.rows, A.cols, A._extract_rows())


def save_vector(path, v):
    """Write a Vector as a rows x 1 file."""
    _write(path, v.domain, v.n, 1, ([s] for s in v._extract()))


def _fail(path, lineno, msg):
    raise ParseError("%s:%d: %s" % (path, lineno, msg))


def _parse_header(path, line):
    parts = line.split()
    if len(parts) != 5 or parts[0] != MAGIC:
        _fail(path, 1, "bad header %r" % line.strip())
    try:
        rows, cols, bits = int(parts[1]), int(parts[2]), int(parts[4])
    except ValueError:
        _fail(path, 1, "non-integer dimensions in header")
    tag = parts[3]
    if rows < 1 or cols < 1:
        _fail(path, 1, "dimensions must be positive")
    if tag == "bf":
        if bits < 2:
            _fail(path, 1, "bad precision %d" % bits)
        return rows, cols, BfDomain(bits)
    try:
        ptag = PrecisionTag.from_name(tag)
    except Exception:
        _fail(path, 1, "unknown scalar tag %r" % tag)
    if bits != ptag.bits:
        _fail(path, 1, "tag %s carries %d bits, header says %d"
              % (tag, ptag.bits, bits))
    return rows, cols, McDomain(ptag)


def _parse_mc_entry(path, lineno, toks, k):
    try:
        comps = tuple(float.fromhex(t) for t in toks)
    except ValueError:
        _fail(path, lineno, "bad hex-float component in %r" % (toks,))
    try:
        return MultiComp(comps).components
    except Exception:
        _fail(path, lineno, "non-canonical components %r" % (toks,))


def _load(path):
    with open(path, "r", encoding="ascii") as fh:
        rows, cols, domain = _parse_header(path, fh.readline())
        k = domain.k if domain.kind == "mc" else 1
        want = cols * k
        data = []
        for i in range(rows):
            lineno = i + 2
            line = fh.readline()
            if not line:
                _fail(path, lineno, "expected %d rows, file ends at %d"
                      % (rows, i))
            toks = line.split()
            if len(toks) != want:
                _fail(path, lineno, "expected %d tokens, got %d"
                      % (want, len(toks)))
            row = []
            for j in range(cols):
                chunk = toks[j * k:(j + 1) * k]
                if domain.kind == "mc":
                    row.append(_parse_mc_entry(path, lineno, chunk, k))
                else:
                    try:
                        row.append(bf_parse_hex(chunk[0], domain.ctx))
                    except Exception:
                        _fail(path, lineno, "bad hex-float %r" % chunk[0])
            data.append(row)
        for extra in fh:
            if extra.strip():
                _fail(path, rows + 2, "trailing content after %d rows" % rows)
    return rows, cols, domain, data


def load_matrix(path):
    """Read any .mpmat file as a DenseMatrix."""
    rows, cols, domain, data = _load(path)
    m = DenseMatrix.zeros(domain, rows, cols)
    if domain.kind == "mc":
        m._store_rows(data)
    else:
        m.data = data
    return m


def load_vector(path):
    """Read a rows x 1 .mpmat file as a Vector."""
    rows, cols, domain, data = _load(path)
    if cols != 1:
        raise ParseError("%s: vector file must have 1 column, found %d"
                         % (path, cols))
    v = Vector.zeros(domain, rows)
    v._store([row[0] for row in data])
    return v
