#include "isac/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace isac {

double energy(const CVec& x)
{
    double e = 0.0;
    for (const auto& v : x) e += std::norm(v);
    return e;
}

double energy(const CMatrix& m) { return energy(m.data); }

namespace fft {
namespace {

using Key = std::tuple<int, int, int, int, int>;

struct PlanCache {
    std::mutex mu;
    std::map<Key, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& kv : plans) fftw_destroy_plan(kv.second);
    }

    // The planner is not thread-safe; execution with new-array
    // interface is, so only lookup/creation is locked.
    fftw_plan get(int n, int howmany, int stride, int dist, int sign)
    {
        Key key{n, howmany, stride, dist, sign};
        std::lock_guard<std::mutex> lock(mu);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        const std::size_t span = static_cast<std::size_t>(stride) * (n - 1) +
                                 static_cast<std::size_t>(dist) * (howmany - 1) + 1;
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * span));
        int dims[1] = {n};
        fftw_plan p = fftw_plan_many_dft(1, dims, howmany, buf, nullptr, stride, dist, buf,
                                         nullptr, stride, dist, sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!p) throw NumericError("fftw planning failed");
        plans.emplace(key, p);
        return p;
    }
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

}  // namespace

void transform(cd* data, int n, int howmany, int stride, int dist, int sign)
{
    if (n <= 0 || howmany <= 0) return;
    fftw_plan p = cache().get(n, howmany, stride, dist, sign);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

void columns(CMatrix& m, int sign)
{
    transform(m.data.data(), static_cast<int>(m.rows), static_cast<int>(m.cols), 1,
              static_cast<int>(m.rows), sign);
}

void rows(CMatrix& m, int sign)
{
    transform(m.data.data(), static_cast<int>(m.cols), static_cast<int>(m.rows),
              static_cast<int>(m.rows), 1, sign);
}

double bin_frequency(std::size_t k, std::size_t n, double dt)
{
    const double kk = (k <= n / 2) ? static_cast<double>(k)
                                   : static_cast<double>(k) - static_cast<double>(n);
    return kk / (static_cast<double>(n) * dt);
}

}  // namespace fft
}  // namespace isac
