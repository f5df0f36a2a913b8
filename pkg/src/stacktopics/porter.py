"""The original Porter (1980) suffix-stripping stemmer.

Only the rule set of the original publication is implemented; the later
tartarus.org revisions (``logi``, ``bli`` and friends) are not.
"""
import re

_VALID = re.compile(r"[a-z]+\Z")


def _is_cons(w: str, i: int) -> bool:
    ch = w[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        return i == 0 or not _is_cons(w, i - 1)
    return True


def _measure(stem: str) -> int:
    # Number of VC sequences in [C](VC)^m[V].
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _double_cons(w: str) -> bool:
    return len(w) >= 2 and w[-1] == w[-2] and _is_cons(w, len(w) - 1)


def _cvc(w: str) -> bool:
    if len(w) < 3:
        return False
    return (
        _is_cons(w, len(w) - 3)
        and not _is_cons(w, len(w) - 2)
        and _is_cons(w, len(w) - 1)
        and w[-1] not in "wxy"
    )


def _apply(word, rules, cond):
    """Replace the longest matching suffix if ``cond(stem)`` holds.

    When the longest suffix matches but its condition fails, the word is
    returned unchanged; shorter suffixes are not tried.
    """
    for suffix, repl in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            return (stem + repl) if cond(stem, suffix) else word
    return word


def _by_length(rules):
    return sorted(rules, key=lambda r: -len(r[0]))


_STEP2 = _by_length([
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
])
_STEP3 = _by_length([
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
])
_STEP4 = _by_length([
    (s, "") for s in (
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    )
])


def _step1a(w):
    for suffix, repl in (("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")):
        if w.endswith(suffix):
            return w[: len(w) - len(suffix)] + repl
    return w


def _step1b(w):
    if w.endswith("eed"):
        stem = w[:-3]
        return stem + "ee" if _measure(stem) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            stem = w[: len(w) - len(suffix)]
            if not _has_vowel(stem):
                return w
            break
    else:
        return w
    for suffix, repl in (("at", "ate"), ("bl", "ble"), ("iz", "ize")):
        if stem.endswith(suffix):
            return stem[: len(stem) - len(suffix)] + repl
    if _double_cons(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _cvc(stem):
        return stem + "e"
    return stem


def _step1c(w):
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step4_cond(stem, suffix):
    if _measure(stem) <= 1:
        return False
    return suffix != "ion" or (stem[-1:] in ("s", "t"))


def _step5(w):
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _cvc(stem)):
            w = stem
    if _measure(w) > 1 and _double_cons(w) and w.endswith("l"):
        w = w[:-1]
    return w


def stem(word: str) -> str:
    """Porter-stem a lowercase ASCII word.

    >>> stem("caresses"), stem("sky"), stem("relational")
    ('caress', 'sky', 'relat')
    """
    if not _VALID.match(word):
        raise ValueError(f"stem() expects a non-empty [a-z]+ word, got {word!r}")
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _apply(w, _STEP2, lambda s, _: _measure(s) > 0)
    w = _apply(w, _STEP3, lambda s, _: _measure(s) > 0)
    w = _apply(w, _STEP4, _step4_cond)
    return _step5(w)
