"""Accounting of live Gram-matrix storage.

Every Gram-sized array produced by the library is registered with
:func:`track`.  The meter adds the array's ``nbytes`` on registration and
subtracts them when the array is garbage collected, so ``live_bytes``
follows the arrays a consumer actually keeps alive.  Temporaries created
inside numpy expressions are not counted.
"""
import threading
import weakref

import numpy as np


class AllocationMeter:
    """Running count of live tracked bytes and the peak since the last reset."""

    def __init__(self):
        self._lock = threading.Lock()
        self._epoch = 0
        self.live_bytes = 0
        self.peak_bytes = 0

    def reset(self):
        # arrays registered before the reset stop counting
        with self._lock:
            self._epoch += 1
            self.live_bytes = 0
            self.peak_bytes = 0

    def alloc(self, nbytes):
        with self._lock:
            self.live_bytes += nbytes
            if self.live_bytes > self.peak_bytes:
                self.peak_bytes = self.live_bytes
            return self._epoch

    def free(self, nbytes, epoch):
        with self._lock:
            if epoch == self._epoch:
                self.live_bytes -= nbytes

    def track(self, array):
        """Register ``array`` and return it unchanged."""
        base = array
        while isinstance(base.base, np.ndarray):
            base = base.base
        nbytes = base.nbytes
        epoch = self.alloc(nbytes)
        weakref.finalize(base, self.free, nbytes, epoch)
        return array

    def report(self):
        with self._lock:
            return self.live_bytes, self.peak_bytes


METER = AllocationMeter()


def track(array):
    return METER.track(array)


def meter_report():
    """Return ``(live_bytes, peak_bytes)`` of tracked Gram storage."""
    return METER.report()


def reset_meter():
    METER.reset()
