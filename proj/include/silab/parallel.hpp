#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#if defined(_OPENMP)
#include <omp.h>
#endif

namespace silab {

/// Execution policy for the embarrassingly parallel kernels. jobs <= 1 runs
/// the plain serial loop, which is the reference the parallel path is tested
/// against; jobs == 0 means "use the OpenMP default".
struct Exec
{
    int jobs = 0;

    static Exec serial() { return Exec{1}; }
    static Exec parallel(int jobs = 0) { return Exec{jobs}; }
    bool is_serial() const;
};

inline int available_threads()
{
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline bool Exec::is_serial() const
{
#if defined(_OPENMP)
    return jobs == 1 || (jobs == 0 && omp_get_max_threads() == 1) || omp_in_parallel();
#else
    return true;
#endif
}

/// Calls f(i) for i in [0, count). Each index must write only its own
/// output slot; the caller combines the slots in index order, so results do
/// not depend on the thread count.
template <class F>
void parallel_for(std::int64_t count, F&& f, Exec exec = {})
{
    if (exec.is_serial()) {
        for (std::int64_t i = 0; i < count; ++i) f(i);
        return;
    }
#if defined(_OPENMP)
    const int threads = exec.jobs > 0 ? exec.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t i = 0; i < count; ++i) f(i);
#endif
}

/// Streaming mean and variance (Welford), mergeable across chunks.
struct RunningStats
{
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v)
    {
        count += 1.0;
        const double delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }

    void merge(const RunningStats& o)
    {
        if (o.count == 0.0) return;
        if (count == 0.0) {
            *this = o;
            return;
        }
        const double n = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * o.count / n;
        m2 += o.m2 + delta * delta * count * o.count / n;
        count = n;
    }

    double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
    double std_error() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

} // namespace silab
