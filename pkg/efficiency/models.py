"""
Dataset and run-configuration types shared by every efficiency module.

These are immutable value objects, not ORM models: datasets come from CSV
files and nothing is persisted.
"""
import logging
import math
import re
from dataclasses import dataclass, fields, replace
from functools import cached_property

import numpy as np
import pandas as pd

from .exceptions import DatasetError, InvalidTolerances, UnknownDmu

logger = logging.getLogger(__name__)

ID_COLUMN = 'dmu'
INPUT_PREFIX = 'in:'
OUTPUT_PREFIX = 'out:'


@dataclass(frozen=True)
class DmuRecord:
    """
    One decision making unit: an id plus its input and output quantities
    """
    id: str
    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        object.__setattr__(self, 'inputs', tuple(float(v) for v in self.inputs))
        object.__setattr__(self, 'outputs', tuple(float(v) for v in self.outputs))
        if not self.id:
            raise DatasetError("empty DMU id")
        for value in self.inputs + self.outputs:
            if not math.isfinite(value) or value < 0:
                raise DatasetError(f"DMU {self.id} has a negative or non-finite value")

    def __str__(self):
        return f"{self.id} - in={list(self.inputs)} out={list(self.outputs)}"


@dataclass(frozen=True)
class Dataset:
    """
    Ordered, validated collection of DMUs.

    Internal math works on positional indices; ids are resolved once through
    ``index_of``. ``X`` is m x n and ``Y`` is s x n, one column per DMU.
    """
    records: tuple
    input_labels: tuple
    output_labels: tuple

    def __post_init__(self):
        object.__setattr__(self, 'records', tuple(self.records))
        object.__setattr__(self, 'input_labels', tuple(self.input_labels))
        object.__setattr__(self, 'output_labels', tuple(self.output_labels))
        if not self.records:
            raise DatasetError("dataset has no DMU rows")
        seen = set()
        for record in self.records:
            if len(record.inputs) != self.m or len(record.outputs) != self.s:
                raise DatasetError(f"DMU {record.id} does not have {self.m} inputs and {self.s} outputs")
            if record.id in seen:
                raise DatasetError(f"duplicate id {record.id!r}")
            seen.add(record.id)

    @property
    def n(self):
        return len(self.records)

    @property
    def m(self):
        return len(self.input_labels)

    @property
    def s(self):
        return len(self.output_labels)

    @property
    def ids(self):
        return tuple(record.id for record in self.records)

    @cached_property
    def X(self):
        matrix = np.array([record.inputs for record in self.records], dtype=float).T.reshape(self.m, self.n)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def Y(self):
        matrix = np.array([record.outputs for record in self.records], dtype=float).T.reshape(self.s, self.n)
        matrix.setflags(write=False)
        return matrix

    @cached_property
    def _positions(self):
        return {record.id: j for j, record in enumerate(self.records)}

    def index_of(self, dmu_id):
        try:
            return self._positions[dmu_id]
        except KeyError:
            raise UnknownDmu(f"unknown DMU id {dmu_id}") from None

    def check_index(self, o):
        if not 0 <= o < self.n:
            raise UnknownDmu(f"unknown DMU index {o}")
        return o

    def select(self, selector):
        """Resolve ``'all'`` or a single id into positional indices."""
        if selector == 'all':
            return list(range(self.n))
        return [self.index_of(selector)]

    @property
    def header(self):
        return (
            [ID_COLUMN]
            + [f"{INPUT_PREFIX}{label}" for label in self.input_labels]
            + [f"{OUTPUT_PREFIX}{label}" for label in self.output_labels]
        )


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical thresholds of a run; every value lies strictly in (0, 1)
    """
    feasibility_eps: float = 1e-7
    support_eps: float = 1e-7
    efficiency_eps: float = 1e-6
    objective_eps: float = 1e-6

    def __post_init__(self):
        for item in fields(self):
            value = getattr(self, item.name)
            if not isinstance(value, (int, float)) or not 0 < value < 1:
                raise InvalidTolerances(f"{item.name} must be > 0 and < 1, got {value!r}")

    def as_dict(self):
        return {item.name: getattr(self, item.name) for item in fields(self)}


def default_tolerances(**overrides):
    """Return the default tolerances with ``overrides`` applied."""
    unknown = set(overrides) - {item.name for item in fields(Tolerances)}
    if unknown:
        raise InvalidTolerances(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
    return replace(Tolerances(), **overrides)


def _parse_header(cells):
    if not cells or cells[0] != ID_COLUMN:
        raise DatasetError(f"missing header: first column must be '{ID_COLUMN}'", row=1, column=1)
    input_labels, output_labels = [], []
    for position, name in enumerate(cells[1:], start=2):
        if name.startswith(INPUT_PREFIX) and len(name) > len(INPUT_PREFIX):
            if output_labels:
                raise DatasetError("input columns must precede output columns", row=1, column=name)
            input_labels.append(name[len(INPUT_PREFIX):])
        elif name.startswith(OUTPUT_PREFIX) and len(name) > len(OUTPUT_PREFIX):
            output_labels.append(name[len(OUTPUT_PREFIX):])
        else:
            raise DatasetError(f"header cell {name!r} is not 'in:<label>' or 'out:<label>'", row=1, column=position)
    if not input_labels or not output_labels:
        raise DatasetError("header needs at least one input and one output column", row=1)
    if len(set(input_labels)) != len(input_labels) or len(set(output_labels)) != len(output_labels):
        raise DatasetError("duplicate column label in header", row=1)
    return input_labels, output_labels


def load_dataset(source):
    """
    Read the ``dmu,in:<label>...,out:<label>...`` CSV dialect into a Dataset.

    ``source`` is a path or a text stream. Rows are numbered as in the file,
    the header being row 1. Every problem raises ``DatasetError`` naming the
    row and column.
    """
    from .serializers import DmuRecordSerializer

    try:
        frame = pd.read_csv(
            source, header=None, dtype=str, keep_default_na=False,
            skip_blank_lines=True, encoding='utf-8',
        )
    except pd.errors.EmptyDataError:
        raise DatasetError("missing header", row=1) from None
    except pd.errors.ParserError as exc:
        match = re.search(r'line (\d+)', str(exc))
        row = int(match.group(1)) if match else None
        raise DatasetError("ragged row: more cells than header columns", row=row) from None

    cells = [[cell.strip() if isinstance(cell, str) else cell for cell in row] for row in frame.itertuples(index=False)]
    header = cells[0]
    input_labels, output_labels = _parse_header(header)
    m = len(input_labels)

    records, seen = [], {}
    for row_number, row in enumerate(cells[1:], start=2):
        if any(not isinstance(cell, str) for cell in row):
            raise DatasetError(f"ragged row: expected {len(header)} cells", row=row_number)
        serializer = DmuRecordSerializer(data={
            'id': row[0],
            'inputs': row[1:1 + m],
            'outputs': row[1 + m:],
        })
        if not serializer.is_valid():
            message, offset = serializer.first_error()
            column = header[0] if offset is None else header[offset]
            raise DatasetError(message, row=row_number, column=column)
        dmu_id = serializer.validated_data['id']
        if dmu_id in seen:
            raise DatasetError(f"duplicate id {dmu_id!r} (first seen at row {seen[dmu_id]})", row=row_number, column=ID_COLUMN)
        seen[dmu_id] = row_number
        records.append(DmuRecord(**serializer.validated_data))

    if not records:
        raise DatasetError("dataset has no DMU rows", row=2)
    dataset = Dataset(records=records, input_labels=input_labels, output_labels=output_labels)
    logger.debug("Loaded dataset with n=%d, m=%d, s=%d", dataset.n, dataset.m, dataset.s)
    return dataset


def dump_dataset(dataset, sink):
    """Write ``dataset`` back in the CSV dialect read by ``load_dataset``."""
    frame = pd.DataFrame(
        [[record.id, *record.inputs, *record.outputs] for record in dataset.records],
        columns=dataset.header,
    )
    frame.to_csv(sink, index=False, lineterminator='\n')
