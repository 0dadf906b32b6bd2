"""Colored dg operads: data, axioms, maps, equivalences and constructions."""

from opforge.operads.base import *  # noqa: F401,F403
from opforge.operads.base import __all__ as _base_all
from opforge.operads.builtin import *  # noqa: F401,F403
from opforge.operads.builtin import __all__ as _builtin_all
from opforge.operads.constructions import *  # noqa: F401,F403
from opforge.operads.constructions import __all__ as _cons_all
from opforge.operads.equivalence import *  # noqa: F401,F403
from opforge.operads.equivalence import __all__ as _eq_all
from opforge.operads.prop import *  # noqa: F401,F403
from opforge.operads.prop import __all__ as _prop_all

__all__ = _base_all + _builtin_all + _cons_all + _eq_all + _prop_all
