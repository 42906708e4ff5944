"""
CSV and console output of harness results.
"""
import csv
import io

FLOAT_FORMAT = '%.16e'


def _number(value):
    if value is None:
        return ''
    return FLOAT_FORMAT % value


def record_header(problem):
    """t, q1..qm, p1..pm, H_err, <invariant>_err..., iters."""
    m = problem.dim
    return (
        ['t']
        + [f'q{i}' for i in range(1, m + 1)]
        + [f'p{i}' for i in range(1, m + 1)]
        + ['H_err']
        + [f'{name}_err' for name in problem.extra_invariants]
        + ['iters']
    )


def record_row(problem, record):
    return (
        [_number(record.t)]
        + [_number(value) for value in record.q]
        + [_number(value) for value in record.p]
        + [_number(record.H_err)]
        + [_number(record.invariant_errors[name])
           for name in problem.extra_invariants]
        + [str(record.iterations)]
    )


def write_csv(header, rows):
    """Render a header and rows as CSV text with LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def records_csv(problem, records):
    return write_csv(record_header(problem),
                     (record_row(problem, record) for record in records))


def drift_csv(result):
    return write_csv(['t', 'H_err'], (
        [_number(t), _number(error)]
        for t, error in zip(result.times, result.errors)
    ))


def converge_header(invariants):
    return (['method', 'n', 'h', 'e_y', 'rate_y', 'e_H', 'rate_H']
            + [f'e_{name}' for name in invariants] + ['seconds'])


def converge_csv(rows, invariants):
    return write_csv(converge_header(invariants), (
        [row.method, str(row.n), _number(row.h), _number(row.e_y),
         _number(row.rate_y), _number(row.e_H), _number(row.rate_H)]
        + [_number(row.invariant_errors[name]) for name in invariants]
        + [_number(row.elapsed)]
        for row in rows
    ))


def converge_table(rows, invariants):
    """Console table: one block per method, rates as '***' when undefined."""
    def rate(value):
        return '***' if value is None else f'{value:.2f}'

    columns = ['n', 'e_y', 'rate', 'e_H', 'rate'] + [
        f'e_{name}' for name in invariants] + ['time (s)']
    lines = []
    method = None
    for row in rows:
        if row.method != method:
            method = row.method
            if lines:
                lines.append('')
            lines.append(method)
            lines.append(' '.join(f'{column:>10}' for column in columns))
        cells = [f'{row.n:>10d}', f'{row.e_y:>10.2e}',
                 f'{rate(row.rate_y):>10}', f'{row.e_H:>10.2e}',
                 f'{rate(row.rate_H):>10}']
        cells += [f'{row.invariant_errors[name]:>10.2e}'
                  for name in invariants]
        cells.append(f'{row.elapsed:>10.3f}')
        lines.append(' '.join(cells))
    return '\n'.join(lines)
