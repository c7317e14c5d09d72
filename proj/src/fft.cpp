#include "sprom/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace sprom::fft {

namespace {

// FFTW planner is not thread-safe; plans are cached per shape and executed
// via the new-array interface (safe on distinct buffers). FFTW_UNALIGNED
// keeps the plan valid for any buffer alignment.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int howmany, int stride, int sign) {
        std::lock_guard<std::mutex> lk(mutex_);
        auto key = std::make_tuple(n, howmany, stride, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<Complex> scratch(static_cast<std::size_t>(n) * stride);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_many_dft(
            1, &n, howmany, buf, nullptr, stride, 1, buf, nullptr, stride, 1,
            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

Mat transform(const Mat& in, int sign) {
    const int rows = static_cast<int>(in.rows());
    const int cols = static_cast<int>(in.cols());
    Mat out = in;
    if (rows == 0 || cols == 0) return out;
    fftw_plan plan = PlanCache::instance().get(cols, rows, rows, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(out.data());
    fftw_execute_dft(plan, buf, buf);
    return out;
}

}  // namespace

Mat forward(const Mat& samples) { return transform(samples, FFTW_FORWARD); }

Mat inverse(const Mat& spectrum) {
    Mat out = transform(spectrum, FFTW_BACKWARD);
    if (out.cols() > 0) out *= 1.0 / static_cast<double>(out.cols());
    return out;
}

Vec forward(const Vec& samples) {
    Mat m = samples.transpose();
    return forward(m).transpose();
}

Vec inverse(const Vec& spectrum) {
    Mat m = spectrum.transpose();
    return inverse(m).transpose();
}

}  // namespace sprom::fft
