#include "nli/patterns.hpp"

#include <algorithm>
#include <functional>

namespace nli {

void MonoBlock::canonicalize() {
    std::sort(factors.begin(), factors.end());
}

void MonoBlock::exponents(int& ex, int& exc, int& ey, int& eyc) const {
    ex = exc = ey = eyc = 0;
    for (const auto& f : factors) {
        if (!f.pol_y && !f.conj) ++ex;
        else if (!f.pol_y && f.conj) ++exc;
        else if (f.pol_y && !f.conj) ++ey;
        else ++eyc;
    }
}

std::string MonoBlock::key() const {
    int ex, exc, ey, eyc;
    exponents(ex, exc, ey, eyc);
    std::string s;
    s.reserve(static_cast<std::size_t>(ex + exc + ey + eyc));
    for (int i = 0; i < ex; ++i) s += 'x';
    for (int i = 0; i < exc; ++i) s += 'X';
    for (int i = 0; i < ey; ++i) s += 'y';
    for (int i = 0; i < eyc; ++i) s += 'Y';
    return s;
}

void GroupPattern::canonicalize() {
    for (auto& b : blocks) b.canonicalize();
    std::vector<std::pair<std::string, int>> order;
    order.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i)
        order.emplace_back(blocks[i].key(), static_cast<int>(i));
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        const bool ap = a.second == pinned;
        const bool bp = b.second == pinned;
        if (ap != bp) return ap; // pinned block first
        return a.first < b.first;
    });
    std::vector<MonoBlock> nb;
    int new_pinned = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i].second == pinned) new_pinned = static_cast<int>(i);
        nb.push_back(blocks[static_cast<std::size_t>(order[i].second)]);
    }
    blocks = std::move(nb);
    pinned = new_pinned;
}

std::string GroupPattern::key() const {
    GroupPattern c = *this;
    c.canonicalize();
    std::string s;
    for (std::size_t i = 0; i < c.blocks.size(); ++i) {
        if (static_cast<int>(i) == c.pinned) s += '@';
        s += c.blocks[i].key();
        if (i + 1 < c.blocks.size()) s += '|';
    }
    return s;
}

std::vector<std::vector<std::vector<int>>> set_partitions(int n) {
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    // restricted growth strings
    const auto emit = [&]() {
        int nb = 0;
        for (int v : assign) nb = std::max(nb, v + 1);
        std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nb));
        for (int i = 0; i < n; ++i) blocks[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])].push_back(i);
        out.push_back(std::move(blocks));
    };
    const std::function<void(int, int)> rec = [&](int i, int maxv) {
        if (i == n) {
            emit();
            return;
        }
        for (int v = 0; v <= maxv + 1 && v < n; ++v) {
            assign[static_cast<std::size_t>(i)] = v;
            rec(i + 1, std::max(maxv, v));
        }
    };
    if (n == 0) {
        out.push_back({});
        return out;
    }
    rec(0, -1);
    return out;
}

double moebius_block(int k) {
    double f = 1.0;
    for (int i = 2; i < k; ++i) f *= i;
    return (k % 2 == 1 ? 1.0 : -1.0) * f;
}

} // namespace nli
