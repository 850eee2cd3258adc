"""CSV and binary writers for traces, schedules and transmitted symbols."""

import csv
import io

import numpy as np

from .quantizer import pack_indices


def fmt(value):
    """Round-trippable, platform-independent number formatting."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if np.isnan(value):
        return "nan"
    return "%.17g" % value


def trace_header(n, p, m):
    cols = ["k", "t"]
    cols += [f"x{i}" for i in range(n)]
    cols += [f"xhat{i}" for i in range(n)]
    cols += [f"y{i}" for i in range(p)]
    cols += ["q_index"]
    cols += [f"q{i}" for i in range(p)]
    cols += [f"Q1_yhat{i}" for i in range(p)]
    cols += [f"Q2_u{i}" for i in range(m)]
    cols += [f"u{i}" for i in range(m)]
    cols += ["E", "E1", "E2", "overflow"]
    return cols


def trace_rows(trace):
    for r in trace:
        row = [r.k, r.t, *r.x, *r.xhat, *r.y, r.q_index, *r.q, *r.Q1_yhat]
        row += [*r.Q2_u, *r.u_applied, r.E, r.E1, r.E2, r.overflow]
        yield [fmt(v) for v in row]


def _write(path, header, rows, preamble=()):
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def write_trace_csv(path, trace, dp, preamble=()):
    return _write(path, trace_header(dp.n, dp.p, dp.m), trace_rows(trace), preamble)


def write_schedule_csv(path, schedule, preamble=()):
    rows = ([fmt(v) for v in row] for row in schedule.rows())
    return _write(path, ["k", "E_k", "E1_k", "E2_k", "mu_k"], rows, preamble)


def write_table_csv(path, header, rows):
    return _write(path, header, ([fmt(v) if not isinstance(v, str) else v for v in r] for r in rows))


def transmitted_symbols(trace):
    """Box indices in send order: ``q1, q2, q`` per step (full) or ``q``."""
    out = []
    for r in trace:
        if r.overflow:
            break
        if trace.protocol == "full":
            out += [r.q1_index, r.q2_index]
        if r.q_index >= 0:
            out.append(r.q_index)
    return out


def write_symbols(path, trace):
    data = pack_indices(transmitted_symbols(trace))
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def read_trace_csv(path):
    """Parse a trace CSV back into a ``{column: array}`` mapping."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    body = np.array([[float(v) for v in row] for row in reader])
    if body.size == 0:
        body = body.reshape(0, len(header))
    return {name: body[:, j] for j, name in enumerate(header)}
