#include "otfsradar/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace otfsradar::fft {

namespace {

// Plan cache shared across threads. FFTW plan creation is not thread-safe,
// so every cache miss takes the mutex; execution via the new-array interface
// is safe without it. FFTW_ESTIMATE keeps plan selection independent of
// runtime timing measurements, which keeps results bitwise reproducible
// across runs; FFTW_UNALIGNED makes one plan valid for any buffer.
struct PlanKey {
    int n, count, stride, dist, sign;
    bool operator<(const PlanKey& o) const {
        return std::tie(n, count, stride, dist, sign) < std::tie(o.n, o.count, o.stride, o.dist, o.sign);
    }
};

std::mutex g_plan_mutex;
std::map<PlanKey, fftw_plan>& plan_cache() {
    static std::map<PlanKey, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(const PlanKey& key, fftw_complex* data) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    fftw_plan plan = fftw_plan_many_dft(1, &key.n, key.count,
                                        data, nullptr, key.stride, key.dist,
                                        data, nullptr, key.stride, key.dist,
                                        key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void transform(Complex* data, int n, int count, int stride, int dist, Direction dir) {
    if (n <= 0 || count <= 0) throw std::invalid_argument("fft: nonpositive size");
    if (n == 1) return;
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    PlanKey key{n, count, stride, dist, dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD};
    fftw_plan plan = get_plan(key, raw);
    fftw_execute_dft(plan, raw, raw);
}

}  // namespace otfsradar::fft
