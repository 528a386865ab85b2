#include "quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include <fmt/format.h>

#include "errors.hpp"

namespace reprsize {
namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWgk[7];
    double g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        k += kWgk[j] * s;
        if (j % 2 == 1) g += kWg[j / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("integrate: non-finite interval endpoint");
    if (a == b) return {0.0, 0.0, 0};

    std::priority_queue<Piece> heap;
    Piece first = gk15(f, a, b);
    heap.push(first);
    double total = first.value;
    double err = first.error;
    int evals = 15;

    auto done = [&] { return err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };

    while (!done()) {
        if (static_cast<int>(heap.size()) >= opt.max_intervals)
            throw NumericError(
                fmt::format("integrate: tolerance not met on [{}, {}] (achieved {:.3e})", a, b, err),
                err);
        Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval can no longer be split in floating point; accept what we have.
            heap.push(worst);
            break;
        }
        Piece l = gk15(f, worst.a, mid);
        Piece r = gk15(f, mid, worst.b);
        evals += 30;
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }

    // Re-sum from the pieces to shed drift from the incremental updates.
    double sum = 0.0, esum = 0.0;
    std::vector<Piece> pieces;
    pieces.reserve(heap.size());
    while (!heap.empty()) {
        pieces.push_back(heap.top());
        heap.pop();
    }
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
        sum += it->value;
        esum += it->error;
    }
    if (!std::isfinite(sum)) throw NumericError("integrate: non-finite result", esum);
    return {sum, esum, evals};
}

}  // namespace reprsize
