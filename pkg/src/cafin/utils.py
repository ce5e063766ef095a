#!/usr/bin/env python
"""
Module miscellaneous utilities
"""
import json
import time
import hashlib
import logging
import pathlib
from collections.abc import Mapping

import numpy as np

from .errors import ConfigurationError, ConsistencyError, ArtifactError

__all__ = ['compare_given_and_required', 'confirm_equal_length_arrays_in_dict', 'csr_ranges',
           'make_rng', 'spawn_seeds', 'hash_arrays', 'hash_mapping', 'Timer',
           'write_container', 'read_container', 'numerical_gradient', 'relative_error']

logger = logging.getLogger(__name__)

_HEADER_LENGTH = np.dtype('<u8')


def compare_given_and_required(given, required=set(), optional=set(), error_message="Given set of keys is not valid"):
    """
        Check that a set of given keys holds every required key and nothing
        beyond the required and optional ones.
    """
    given, required, optional = set(given), set(required), set(optional)
    missing = required.difference(given)
    unknown = given.difference(required.union(optional))
    if missing or unknown:
        details = []
        if missing:
            details.append(f"missing {sorted(missing)}")
        if unknown:
            details.append(f"unknown {sorted(unknown)}")
        raise ConfigurationError(f"{error_message}: {', '.join(details)}")


def confirm_equal_length_arrays_in_dict(arrays: Mapping, error_message_dict_name="arrays"):
    lengths = {key: len(value) for key, value in arrays.items()}
    if len(set(lengths.values())) > 1:
        raise ConsistencyError(f"Arrays in {error_message_dict_name} must have equal lengths, got {lengths}")


def csr_ranges(offsets, rows):
    """
        Expand CSR rows into the flat positions of their entries.

        Parameters
        ----------
        offsets : array-like
            CSR offsets array
        rows : array-like
            Rows to expand, repetitions allowed

        Returns
        -------
        positions : ndarray
            Positions in the CSR column array, rows concatenated in order
        counts : ndarray
            Number of entries of each row
    """
    rows = np.asarray(rows, dtype=np.int64)
    starts = offsets[rows]
    counts = offsets[rows + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64), counts
    shifts = np.repeat(starts - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    return shifts + np.arange(total, dtype=np.int64), counts


def make_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed, n):
    """
        Derive n independent integer seeds from a parent seed.
    """
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(n)]


def hash_arrays(*arrays):
    digest = hashlib.sha256()
    for array in arrays:
        array = np.ascontiguousarray(array)
        digest.update(str((array.dtype.str, array.shape)).encode())
        digest.update(array.tobytes())
    return digest.hexdigest()


def hash_mapping(mapping: Mapping):
    return hashlib.sha256(json.dumps(mapping, sort_keys=True, default=str).encode()).hexdigest()


class Timer:
    """
        Context manager measuring wall-time in seconds.
    """
    def __init__(self) -> None:
        self.__start = None
        self.__seconds = None

    def __enter__(self):
        self.__start = time.perf_counter()
        return self

    def __exit__(self, *exc_info):
        self.__seconds = time.perf_counter() - self.__start
        return False

    @property
    def seconds(self):
        if self.__seconds is None:
            return time.perf_counter() - self.__start
        return self.__seconds


def write_container(path, magic: bytes, header: dict, arrays):
    """
        Write a binary container: magic bytes, header length, JSON header
        and the arrays row-major in order.

        Parameters
        ----------
        path : path-like
            Destination file
        magic : bytes
            8 bytes identifying the kind of container
        header : dict
            JSON-serializable header fields
        arrays : list of ndarray
            Arrays written after the header
    """
    if len(magic) != 8:
        raise ValueError("Container magic must be 8 bytes long")
    arrays = [np.ascontiguousarray(array) for array in arrays]
    header = {**header, 'arrays': [{'dtype': array.dtype.str, 'shape': list(array.shape)} for array in arrays]}
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as out:
        out.write(magic)
        out.write(np.array([len(encoded)], dtype=_HEADER_LENGTH).tobytes())
        out.write(encoded)
        for array in arrays:
            out.write(array.tobytes(order='C'))
    logger.debug("Wrote %s (%d arrays)", path, len(arrays))


def read_container(path, magic: bytes):
    """
        Read back a container written by write_container.

        Returns
        -------
        header : dict
        arrays : list of ndarray
    """
    path = pathlib.Path(path)
    if not path.exists():
        raise ArtifactError(f"Missing container file {path}")
    raw = path.read_bytes()
    if raw[:8] != magic:
        raise ArtifactError(f"File {path} is not a {magic!r} container")
    length = int(np.frombuffer(raw, dtype=_HEADER_LENGTH, count=1, offset=8)[0])
    start = 8 + _HEADER_LENGTH.itemsize
    try:
        header = json.loads(raw[start:start + length].decode('utf-8'))
    except ValueError as error:
        raise ArtifactError(f"Corrupt header in {path}") from error
    offset = start + length
    arrays = []
    for entry in header.pop('arrays'):
        dtype = np.dtype(entry['dtype'])
        count = int(np.prod(entry['shape'], dtype=np.int64))
        if offset + count * dtype.itemsize > len(raw):
            raise ArtifactError(f"Truncated container {path}")
        arrays.append(np.frombuffer(raw, dtype=dtype, count=count, offset=offset).reshape(entry['shape']).copy())
        offset += count * dtype.itemsize
    return header, arrays


def numerical_gradient(function, x, h=1e-5):
    """
        Central finite differences of a scalar function at x.

        Parameters
        ----------
        function : callable [ndarray --> float]
        x : ndarray
            Point of evaluation, left unchanged on return
        h : float
            Perturbation

        Returns
        -------
        gradient : ndarray shaped like x
    """
    x = np.asarray(x, dtype=np.float64)
    gradient = np.zeros_like(x)
    flat, flat_gradient = x.reshape(-1), gradient.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = function(x)
        flat[i] = original - h
        lower = function(x)
        flat[i] = original
        flat_gradient[i] = (upper - lower) / (2 * h)
    return gradient


def relative_error(analytic, numeric, floor=1e-12):
    analytic, numeric = np.ravel(analytic), np.ravel(numeric)
    scale = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), floor)
    return float(np.linalg.norm(analytic - numeric) / scale)
