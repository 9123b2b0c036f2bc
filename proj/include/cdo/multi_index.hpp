#pragma once

#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "cdo/errors.hpp"

namespace cdo {

/// Shift multi-index k of a monomial T^k = T_1^{k_1} ... T_g^{k_g}.
struct MultiIndex {
    std::vector<int> k;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> v) : k(std::move(v)) {}
    static MultiIndex zero(int g) { return MultiIndex(std::vector<int>(g, 0)); }
    static MultiIndex unit(int g, int axis, int amount = 1) {
        MultiIndex m = zero(g);
        m.k[axis] = amount;
        return m;
    }

    int dim() const { return static_cast<int>(k.size()); }
    int operator[](int i) const { return k[i]; }
    int& operator[](int i) { return k[i]; }

    MultiIndex operator+(const MultiIndex& o) const {
        MultiIndex r = *this;
        for (int i = 0; i < dim(); ++i) r.k[i] += o.k[i];
        return r;
    }
    MultiIndex operator-(const MultiIndex& o) const {
        MultiIndex r = *this;
        for (int i = 0; i < dim(); ++i) r.k[i] -= o.k[i];
        return r;
    }
    bool operator==(const MultiIndex& o) const { return k == o.k; }
    bool operator!=(const MultiIndex& o) const { return k != o.k; }
    bool operator<(const MultiIndex& o) const { return k < o.k; } // lexicographic

    int norm_inf() const {
        int m = 0;
        for (int v : k) m = std::max(m, std::abs(v));
        return m;
    }
    int degree() const { return std::accumulate(k.begin(), k.end(), 0); }

    std::string str() const {
        std::string s = "(";
        for (int i = 0; i < dim(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
        return s + ")";
    }
};

/// Axis-aligned box of lattice points, lo <= n <= hi componentwise.
struct LatticeWindow {
    MultiIndex lo, hi;

    LatticeWindow() = default;
    LatticeWindow(MultiIndex l, MultiIndex h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.dim() != hi.dim()) throw ArityMismatch("window lo/hi dimension mismatch");
        for (int i = 0; i < lo.dim(); ++i)
            if (lo[i] > hi[i]) throw EmptyWindow("window has lo > hi on axis " + std::to_string(i));
    }
    static LatticeWindow cube(int g, int lo, int hi) {
        return LatticeWindow(MultiIndex(std::vector<int>(g, lo)), MultiIndex(std::vector<int>(g, hi)));
    }

    int dim() const { return lo.dim(); }
    long size() const {
        long s = 1;
        for (int i = 0; i < dim(); ++i) s *= (hi[i] - lo[i] + 1);
        return s;
    }
    bool contains(const MultiIndex& n) const {
        for (int i = 0; i < dim(); ++i)
            if (n[i] < lo[i] || n[i] > hi[i]) return false;
        return true;
    }
    // Grows the window so that n + shift stays inside for every listed shift.
    LatticeWindow dilated(const std::vector<MultiIndex>& shifts) const {
        LatticeWindow w = *this;
        for (const auto& s : shifts)
            for (int i = 0; i < dim(); ++i) {
                w.lo[i] = std::min(w.lo[i], lo[i] + s[i]);
                w.hi[i] = std::max(w.hi[i], hi[i] + s[i]);
            }
        return w;
    }
    // Row-major visit, deterministic order.
    void for_each(const std::function<void(const MultiIndex&)>& fn) const {
        MultiIndex n = lo;
        while (true) {
            fn(n);
            int i = dim() - 1;
            while (i >= 0) {
                if (++n[i] <= hi[i]) break;
                n[i] = lo[i];
                --i;
            }
            if (i < 0) break;
        }
    }
    std::vector<MultiIndex> points() const {
        std::vector<MultiIndex> out;
        out.reserve(static_cast<size_t>(size()));
        for_each([&](const MultiIndex& n) { out.push_back(n); });
        return out;
    }
};

} // namespace cdo
