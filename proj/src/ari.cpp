#include "fmcl/ari.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace fmcl {

namespace {

double choose2(double n)
{
    return n * (n - 1.0) / 2.0;
}

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b)
{
    if (a.size() != b.size()) throw std::invalid_argument("ari: labelings differ in length");
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;

    std::map<std::pair<int, int>, double> cells;
    std::map<int, double> rows;
    std::map<int, double> cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cells[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    double index = 0.0;
    for (const auto& [key, count] : cells) index += choose2(count);
    double sum_rows = 0.0;
    for (const auto& [key, count] : rows) sum_rows += choose2(count);
    double sum_cols = 0.0;
    for (const auto& [key, count] : cols) sum_cols += choose2(count);

    const double expected = sum_rows * sum_cols / choose2(n);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

}  // namespace fmcl
