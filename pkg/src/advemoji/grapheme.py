"""Extended grapheme cluster segmentation (UAX #29).

Splitting emoji-bearing text on raw code points breaks ZWJ families,
skin-tone modifiers, variation selectors, keycaps and flags into fragments
that render differently from the original. This module implements the
UAX #29 grapheme cluster boundary rules (GB1-GB13, GB999) so that every
multi-code-point emoji stays one atomic unit.

The stdlib exposes general categories but not the Grapheme_Cluster_Break or
Extended_Pictographic properties, so the ranges that cannot be derived from
``unicodedata`` are embedded below.
"""

from __future__ import annotations

import bisect
import unicodedata
from typing import Iterator

# Grapheme_Cluster_Break classes (only the ones the rules distinguish).
_OTHER = 0
_CR = 1
_LF = 2
_CONTROL = 3
_EXTEND = 4
_ZWJ = 5
_RI = 6
_PREPEND = 7
_SPACINGMARK = 8
_HANGUL_L = 9
_HANGUL_V = 10
_HANGUL_T = 11
_HANGUL_LV = 12
_HANGUL_LVT = 13

# Extended_Pictographic ranges from the Unicode emoji data files. The large
# trailing ranges are reserved-but-unassigned code points that the standard
# includes for forward compatibility.
_EXT_PICT_RANGES = (
    (0x00A9, 0x00A9), (0x00AE, 0x00AE), (0x203C, 0x203C), (0x2049, 0x2049),
    (0x2122, 0x2122), (0x2139, 0x2139), (0x2194, 0x2199), (0x21A9, 0x21AA),
    (0x231A, 0x231B), (0x2328, 0x2328), (0x2388, 0x2388), (0x23CF, 0x23CF),
    (0x23E9, 0x23F3), (0x23F8, 0x23FA), (0x24C2, 0x24C2), (0x25AA, 0x25AB),
    (0x25B6, 0x25B6), (0x25C0, 0x25C0), (0x25FB, 0x25FE), (0x2600, 0x2605),
    (0x2607, 0x2612), (0x2614, 0x2685), (0x2690, 0x2705), (0x2708, 0x2712),
    (0x2714, 0x2714), (0x2716, 0x2716), (0x271D, 0x271D), (0x2721, 0x2721),
    (0x2728, 0x2728), (0x2733, 0x2734), (0x2744, 0x2744), (0x2747, 0x2747),
    (0x274C, 0x274C), (0x274E, 0x274E), (0x2753, 0x2755), (0x2757, 0x2757),
    (0x2763, 0x2767), (0x2795, 0x2797), (0x27A1, 0x27A1), (0x27B0, 0x27B0),
    (0x27BF, 0x27BF), (0x2934, 0x2935), (0x2B05, 0x2B07), (0x2B1B, 0x2B1C),
    (0x2B50, 0x2B50), (0x2B55, 0x2B55), (0x3030, 0x3030), (0x303D, 0x303D),
    (0x3297, 0x3297), (0x3299, 0x3299),
    (0x1F000, 0x1F0FF), (0x1F10D, 0x1F10F), (0x1F12F, 0x1F12F),
    (0x1F16C, 0x1F171), (0x1F17E, 0x1F17F), (0x1F18E, 0x1F18E),
    (0x1F191, 0x1F19A), (0x1F1AD, 0x1F1E5), (0x1F201, 0x1F20F),
    (0x1F21A, 0x1F21A), (0x1F22F, 0x1F22F), (0x1F232, 0x1F23A),
    (0x1F23C, 0x1F23F), (0x1F249, 0x1F3FA), (0x1F400, 0x1F53D),
    (0x1F546, 0x1F64F), (0x1F680, 0x1F6FF), (0x1F774, 0x1F77F),
    (0x1F7D5, 0x1F7FF), (0x1F80C, 0x1F80F), (0x1F848, 0x1F84F),
    (0x1F85A, 0x1F85F), (0x1F888, 0x1F88F), (0x1F8AE, 0x1F8FF),
    (0x1F90C, 0x1F93A), (0x1F93C, 0x1F945), (0x1F947, 0x1FAFF),
    (0x1FC00, 0x1FFFD),
)
_EXT_PICT_STARTS = tuple(lo for lo, _ in _EXT_PICT_RANGES)
_EXT_PICT_ENDS = tuple(hi for _, hi in _EXT_PICT_RANGES)

# Grapheme_Extend additions that are not General_Category Mn/Me: ZWNJ, emoji
# skin-tone modifiers, tag characters, halfwidth voicing marks, and the Mc
# code points that carry Other_Grapheme_Extend.
_EXTEND_EXTRA = frozenset(
    [0x200C, 0xFF9E, 0xFF9F,
     0x09BE, 0x09D7, 0x0B3E, 0x0B57, 0x0BBE, 0x0BD7, 0x0CC2, 0x0CD5, 0x0CD6,
     0x0D3E, 0x0D57, 0x0DCF, 0x0DDF, 0x302E, 0x302F, 0x1D165,
     0x1D16E, 0x1D16F, 0x1D170, 0x1D171, 0x1D172]
    + list(range(0x1F3FB, 0x1F3FF + 1))
    + list(range(0xE0020, 0xE007F + 1))
)

_PREPEND_SET = frozenset(
    list(range(0x0600, 0x0605 + 1))
    + [0x06DD, 0x070F, 0x08E2, 0x0D4E, 0x110BD, 0x110CD, 0x111C2, 0x111C3,
       0x1193F, 0x11941, 0x11A3A, 0x11D46]
    + list(range(0x11A84, 0x11A89 + 1))
)

# Mc code points excluded from SpacingMark by UAX #29, plus the two Lo
# vowel signs that are included.
_SPACINGMARK_EXCLUDE = frozenset(
    [0x102B, 0x102C, 0x1038, 0x1083, 0x108F, 0x1A61, 0x1A63, 0x1A64,
     0xAA7B, 0xAA7D, 0x11720, 0x11721]
    + list(range(0x1062, 0x1064 + 1))
    + list(range(0x1067, 0x106D + 1))
    + list(range(0x1087, 0x108C + 1))
    + list(range(0x109A, 0x109C + 1))
)
_SPACINGMARK_EXTRA = frozenset([0x0E33, 0x0EB3])


def is_extended_pictographic(cp: int) -> bool:
    i = bisect.bisect_right(_EXT_PICT_STARTS, cp) - 1
    return i >= 0 and cp <= _EXT_PICT_ENDS[i]


def _gcb(cp: int) -> int:
    """Grapheme_Cluster_Break class of one code point."""
    if cp == 0x000D:
        return _CR
    if cp == 0x000A:
        return _LF
    if cp == 0x200D:
        return _ZWJ
    if cp in _EXTEND_EXTRA:
        return _EXTEND
    if 0x1F1E6 <= cp <= 0x1F1FF:
        return _RI
    if cp in _PREPEND_SET:
        return _PREPEND
    # Hangul syllable classes.
    if 0x1100 <= cp <= 0x115F or 0xA960 <= cp <= 0xA97C:
        return _HANGUL_L
    if 0x1160 <= cp <= 0x11A7 or 0xD7B0 <= cp <= 0xD7C6:
        return _HANGUL_V
    if 0x11A8 <= cp <= 0x11FF or 0xD7CB <= cp <= 0xD7FB:
        return _HANGUL_T
    if 0xAC00 <= cp <= 0xD7A3:
        return _HANGUL_LV if (cp - 0xAC00) % 28 == 0 else _HANGUL_LVT
    cat = unicodedata.category(chr(cp))
    if cat in ("Mn", "Me"):
        return _EXTEND
    if cat == "Mc":
        return _EXTEND if cp in _EXTEND_EXTRA else _SPACINGMARK
    if cp in _SPACINGMARK_EXTRA:
        return _SPACINGMARK
    if cat in ("Cc", "Cf", "Zl", "Zp", "Cs"):
        return _CONTROL
    return _OTHER


def grapheme_boundaries(text: str) -> Iterator[int]:
    """Yield the character indices at which a new cluster starts (0 first)."""
    n = len(text)
    if n == 0:
        return
    yield 0
    prev = _gcb(ord(text[0]))
    # ep_state tracks the GB11 left context: 1 = ends with \p{ExtPict} Extend*,
    # 2 = ends with \p{ExtPict} Extend* ZWJ, 0 = neither.
    ep_state = 1 if is_extended_pictographic(ord(text[0])) else 0
    ri_run = 1 if prev == _RI else 0
    for i in range(1, n):
        cp = ord(text[i])
        cur = _gcb(cp)
        cur_ep = is_extended_pictographic(cp)

        if prev == _CR and cur == _LF:
            brk = False                                       # GB3
        elif prev in (_CONTROL, _CR, _LF):
            brk = True                                        # GB4
        elif cur in (_CONTROL, _CR, _LF):
            brk = True                                        # GB5
        elif prev == _HANGUL_L and cur in (_HANGUL_L, _HANGUL_V,
                                           _HANGUL_LV, _HANGUL_LVT):
            brk = False                                       # GB6
        elif prev in (_HANGUL_LV, _HANGUL_V) and cur in (_HANGUL_V,
                                                         _HANGUL_T):
            brk = False                                       # GB7
        elif prev in (_HANGUL_LVT, _HANGUL_T) and cur == _HANGUL_T:
            brk = False                                       # GB8
        elif cur in (_EXTEND, _ZWJ):
            brk = False                                       # GB9
        elif cur == _SPACINGMARK:
            brk = False                                       # GB9a
        elif prev == _PREPEND:
            brk = False                                       # GB9b
        elif ep_state == 2 and cur_ep:
            brk = False                                       # GB11
        elif prev == _RI and cur == _RI and ri_run % 2 == 1:
            brk = False                                       # GB12/GB13
        else:
            brk = True                                        # GB999

        if brk:
            yield i
            ri_run = 1 if cur == _RI else 0
            ep_state = 1 if cur_ep else 0
        else:
            ri_run = ri_run + 1 if cur == _RI else 0
            if cur_ep:
                ep_state = 1
            elif ep_state == 1 and cur == _EXTEND:
                ep_state = 1
            elif ep_state == 1 and cur == _ZWJ:
                ep_state = 2
            else:
                ep_state = 0
        prev = cur


def iter_clusters(text: str) -> Iterator[str]:
    """Iterate over the extended grapheme clusters of ``text``."""
    start = None
    for b in grapheme_boundaries(text):
        if start is not None:
            yield text[start:b]
        start = b
    if start is not None:
        yield text[start:]


def clusters(text: str) -> list[str]:
    """The extended grapheme clusters of ``text`` as a list."""
    return list(iter_clusters(text))


def cluster_spans(text: str) -> list[tuple[int, int]]:
    """(start, end) character spans of each cluster, in order."""
    bounds = list(grapheme_boundaries(text))
    bounds.append(len(text))
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
