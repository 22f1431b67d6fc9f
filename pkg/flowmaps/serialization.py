"""
Text serialization of polynomial flow maps.

Layout::

    kind directional
    n_vars 6
    order 3
    t0 0.0
    tf 0.9
    system cr3bp
    reference <N floats>
    gamma_star <N floats>            (directional maps only)
    L <N*(N-1) floats, row-major>    (directional maps only)
    component 0
    <α₁ … α_N : coefficient>
    ...
    end

Floats are written with ``repr`` so loading reproduces every coefficient
bit for bit.
"""

from pathlib import Path
from typing import List, TextIO, Union

import numpy as np

from common.exceptions import UsageError
from poly_algebra.context import TRUNCATION_DIRECTIONAL, TRUNCATION_TOTAL, poly_context
from poly_algebra.polynomial import TruncatedPolynomial
from .maps import KIND_DIRECTIONAL, DirectionFrame, PolyFlowMap

HEADER_KEYS = ('kind', 'n_vars', 'order', 't0', 'tf', 'system', 'reference')


def _floats(values) -> str:
    return ' '.join(repr(float(v)) for v in np.ravel(values))


def _component_lines(component: TruncatedPolynomial) -> List[str]:
    context = component.context
    lines = []
    for position in np.flatnonzero(component.coeffs):
        alpha = context.multi_indices[position]
        lines.append(f"{' '.join(str(a) for a in alpha)} : {float(component.coeffs[position])!r}")
    return lines


def dumps_map(flow_map: PolyFlowMap) -> str:
    lines = [
        f"kind {flow_map.kind}",
        f"n_vars {flow_map.dim}",
        f"order {flow_map.order}",
        f"t0 {float(flow_map.t0)!r}",
        f"tf {float(flow_map.tf)!r}",
        f"system {flow_map.system or '-'}",
        f"reference {_floats(flow_map.reference_state)}",
    ]
    if flow_map.kind == KIND_DIRECTIONAL:
        lines.append(f"gamma_star {_floats(flow_map.frame.gamma_star)}")
        lines.append(f"L {_floats(flow_map.frame.L)}")
    for i, component in enumerate(flow_map.components):
        lines.append(f"component {i}")
        lines.extend(_component_lines(component))
        lines.append("end")
    return '\n'.join(lines) + '\n'


def dump_map(flow_map: PolyFlowMap, target: Union[str, Path, TextIO]):
    """Write ``flow_map`` to a path or an open text stream."""
    text = dumps_map(flow_map)
    if hasattr(target, 'write'):
        target.write(text)
    else:
        Path(target).write_text(text)


def loads_map(text: str) -> PolyFlowMap:
    header = {}
    blocks = []
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if current is not None:
            if line == 'end':
                blocks.append('\n'.join(current))
                current = None
            else:
                current.append(line)
            continue
        key, _, value = line.partition(' ')
        if key == 'component':
            if int(value) != len(blocks):
                raise UsageError(f"line {number}: expected component {len(blocks)}, got {value}")
            current = []
        else:
            header[key] = value
    if current is not None:
        raise UsageError("unterminated component block")
    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise UsageError(f"flow map header is missing {', '.join(missing)}")

    kind = header['kind']
    n_vars = int(header['n_vars'])
    order = int(header['order'])
    reference = np.array([float(v) for v in header['reference'].split()])
    frame = None
    truncation = TRUNCATION_TOTAL
    if kind == KIND_DIRECTIONAL:
        gamma = np.array([float(v) for v in header['gamma_star'].split()])
        L = np.array([float(v) for v in header['L'].split()]).reshape(n_vars, n_vars - 1)
        frame = DirectionFrame(gamma, L)
        truncation = TRUNCATION_DIRECTIONAL
    if len(blocks) != n_vars:
        raise UsageError(f"expected {n_vars} components, found {len(blocks)}")
    context = poly_context(n_vars, order, truncation)
    components = [TruncatedPolynomial.from_text(context, block) for block in blocks]
    system = header['system'] if header['system'] != '-' else ''
    return PolyFlowMap(reference, float(header['t0']), float(header['tf']), kind, order, components,
                       frame=frame, system=system)


def load_map(source: Union[str, Path, TextIO]) -> PolyFlowMap:
    if hasattr(source, 'read'):
        return loads_map(source.read())
    return loads_map(Path(source).read_text())
