#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace prafilter {

// Seeded RNG with self-contained integer draws. std::mt19937_64 output is
// specified by the standard, and the bounded draw below avoids
// std::uniform_int_distribution, whose mapping is implementation-defined.
// Same seed therefore means the same draw sequence on every platform.
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform draw in [0, n) via masked rejection.
    uint64_t uniform_below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        if (n == 1) return 0;
        uint64_t mask = ~uint64_t{0};
        uint64_t limit = n - 1;
        int bits = 0;
        while (limit >> bits) ++bits;
        mask = (bits >= 64) ? ~uint64_t{0} : ((uint64_t{1} << bits) - 1);
        for (;;) {
            uint64_t v = engine_() & mask;
            if (v < n) return v;
        }
    }

    double uniform01() {
        // 53-bit mantissa draw in [0, 1).
        return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in selection order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        if (k > n) throw std::invalid_argument("sample_indices: k > n");
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        std::vector<size_t> out;
        out.reserve(k);
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(uniform_below(n - i));
            std::swap(idx[i], idx[j]);
            out.push_back(idx[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace prafilter
