#include <fragrd/geom/edt.hpp>

#include <limits>

namespace fragrd::geom {

void squared_edt_1d(const double* f, double* out, std::size_t n, std::vector<std::size_t>& v,
                    std::vector<double>& z)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    v.resize(n);
    z.resize(n + 1);
    // Skip leading cells with no parabola.
    std::size_t start = 0;
    while (start < n && f[start] == inf) ++start;
    if (start == n) {
        for (std::size_t q = 0; q < n; ++q) out[q] = inf;
        return;
    }
    std::size_t k = 0;
    v[0] = start;
    z[0] = -inf;
    z[1] = inf;
    for (std::size_t q = start + 1; q < n; ++q) {
        if (f[q] == inf) continue;
        const double fq = f[q] + static_cast<double>(q) * q;
        double s;
        while (true) {
            const std::size_t p = v[k];
            s = (fq - (f[p] + static_cast<double>(p) * p)) / (2.0 * (static_cast<double>(q) - p));
            if (s <= z[k] && k > 0) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        const double d = static_cast<double>(q) - static_cast<double>(v[k]);
        out[q] = d * d + f[v[k]];
    }
}

std::vector<double> squared_edt(const std::vector<std::uint8_t>& seeds, const Grid& grid)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t total = grid.size();
    if (seeds.size() != total) throw GeometryError("squared_edt: seed array does not match the grid");
    std::vector<double> d(total);
    for (std::size_t i = 0; i < total; ++i) d[i] = seeds[i] ? 0.0 : inf;

    const auto st = grid.strides();
    std::vector<double> line, res;
    std::vector<std::size_t> v;
    std::vector<double> z;
    for (int axis = 0; axis < grid.dim; ++axis) {
        const auto n = static_cast<std::size_t>(grid.extents[axis]);
        const std::size_t stride = st[axis];
        line.resize(n);
        res.resize(n);
        // Enumerate line starts: every flat index whose coordinate on `axis` is 0.
        for (std::size_t base = 0; base < total; ++base) {
            if ((base / stride) % n != 0) continue;
            for (std::size_t q = 0; q < n; ++q) line[q] = d[base + q * stride];
            squared_edt_1d(line.data(), res.data(), n, v, z);
            for (std::size_t q = 0; q < n; ++q) d[base + q * stride] = res[q];
        }
    }
    return d;
}

} // namespace fragrd::geom
