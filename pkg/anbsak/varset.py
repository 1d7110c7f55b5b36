"""
Variable sets as bitmasks.

A VarSet is an int whose set bits are variable indices.  It hashes, compares and sorts as the
underlying mask, so ascending mask order is a valid lexicographic order for the subset DPs:
every strict subset of a set precedes it.
"""

from anbsak.errors import AnbSAKValueError
from anbsak import constants


def popcount(mask):
    return bin(mask).count('1')


def iter_bits(mask):
    """Yields the indices of the set bits in ascending order"""
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class VarSet(int):
    """
    Order-free set of variable indices stored as a bitmask.
    """
    __slots__ = ()

    def __new__(cls, mask=0):
        if mask < 0:
            raise AnbSAKValueError("Illegal variable set mask %d" % mask)
        return super().__new__(cls, mask)

    @classmethod
    def of(cls, *variables):
        """
        Builds a set from variable indices, e.g. VarSet.of(0, 2)
        """
        mask = 0
        for v in variables:
            if not 0 <= v < constants.MAX_VARS:
                raise AnbSAKValueError("Illegal variable index %d" % v)
            mask |= 1 << v
        return cls(mask)

    @classmethod
    def from_iterable(cls, variables):
        return cls.of(*variables)

    @classmethod
    def full(cls, n_vars):
        """All variables 0..n_vars-1"""
        return cls((1 << n_vars) - 1)

    @property
    def mask(self):
        return int(self)

    def __contains__(self, v):
        return v >= 0 and (int(self) >> v) & 1 == 1

    def __iter__(self):
        return iter_bits(int(self))

    def __len__(self):
        return popcount(int(self))

    def __bool__(self):
        return int(self) != 0

    def __or__(self, other):
        return VarSet(int(self) | int(other))

    def __and__(self, other):
        return VarSet(int(self) & int(other))

    def __sub__(self, other):
        return VarSet(int(self) & ~int(other))

    def __xor__(self, other):
        return VarSet(int(self) ^ int(other))

    def add(self, v):
        return VarSet(int(self) | (1 << v))

    def remove(self, v):
        if v not in self:
            raise AnbSAKValueError("Variable %d not in %r" % (v, self))
        return VarSet(int(self) & ~(1 << v))

    def discard(self, v):
        return VarSet(int(self) & ~(1 << v))

    def issubset(self, other):
        return int(self) & ~int(other) == 0

    def issuperset(self, other):
        return int(other) & ~int(self) == 0

    def to_list(self):
        return list(iter_bits(int(self)))

    def rank(self, universe):
        """
        Position of this set among all subsets of universe, in ascending mask order

        :param universe: the set whose subsets are ranked
        :type universe: VarSet or int
        :rtype: int
        """
        if not self.issubset(universe):
            raise AnbSAKValueError("%r is not a subset of %r" % (self, VarSet(universe)))
        r = 0
        for k, b in enumerate(iter_bits(int(universe))):
            if (int(self) >> b) & 1:
                r |= 1 << k
        return r

    def __repr__(self):
        return "VarSet({%s})" % ', '.join(str(v) for v in self)

    __str__ = __repr__


class Family:
    """
    An admissible family of variable sets: every set containing ``forced`` and any subset of
    ``free``.  Members are indexed by rank, the compressed free bits, so the DP tables are dense
    arrays of size 2^|free|.  Removing a free element clears one bit of the rank.
    """

    def __init__(self, forced, free):
        if int(forced) & int(free):
            raise AnbSAKValueError("Forced and free variables overlap")
        self.forced = int(forced)
        self.free = int(free)
        self.free_bits = list(iter_bits(self.free))
        self.size = 1 << len(self.free_bits)
        self._masks = None

    def __len__(self):
        return self.size

    def __contains__(self, mask):
        mask = int(mask)
        return mask & self.forced == self.forced and mask & ~(self.forced | self.free) == 0

    def rank(self, mask):
        mask = int(mask)
        r = 0
        for k, b in enumerate(self.free_bits):
            if (mask >> b) & 1:
                r |= 1 << k
        return r

    def mask(self, rank):
        return self.masks[rank]

    @property
    def masks(self):
        """Member masks indexed by rank"""
        if self._masks is None:
            masks = [self.forced]
            for b in self.free_bits:
                bit = 1 << b
                masks.extend([m | bit for m in masks])
            self._masks = masks
        return self._masks

    def varset(self, rank):
        return VarSet(self.masks[rank])

    def free_index_bits(self, rank):
        """Yields (k, variable) for every free element present in the member at rank"""
        for k, b in enumerate(self.free_bits):
            if (rank >> k) & 1:
                yield k, b
