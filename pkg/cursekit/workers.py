from joblib import Parallel, delayed

from .config import CURSEKIT_THREADS


def run_ordered(fn, items, n_jobs=None):
    """Apply fn to every item, possibly in parallel, returning results in input order."""
    items = list(items)
    n_jobs = CURSEKIT_THREADS if n_jobs is None else n_jobs
    if n_jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(item) for item in items)
