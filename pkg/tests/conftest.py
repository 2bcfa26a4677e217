# BLAS thread pools thrash on the small repeated matvecs this suite runs;
# pin them to one thread before any heavy import.
import os

for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import threadpoolctl

_limiter = threadpoolctl.threadpool_limits(limits=1)
