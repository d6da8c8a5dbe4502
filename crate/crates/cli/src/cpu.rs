//! Per-thread CPU clock for run limits and timing.

use agpf_core::Budget;

/// CPU seconds consumed by the calling thread.
pub fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Budget that runs out once the calling thread has spent `limit` CPU
/// seconds from now. The solvers poll it on the thread that created it.
pub fn cpu_budget(limit: Option<f64>) -> Budget {
    match limit {
        None => Budget::unlimited(),
        Some(limit) => {
            let start = thread_cpu_seconds();
            Budget::new(move || thread_cpu_seconds() - start > limit)
        }
    }
}
