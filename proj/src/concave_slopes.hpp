#pragma once

#include <cstddef>
#include <vector>

namespace shapetest::detail {

// Segment slopes of the polyline through (x[k], y[k]), pooled so they are
// non-increasing. Pooling keeps y at the first and last knot and moves the
// others by no more than the concavity violations of the input.
inline std::vector<double> concave_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  struct Pool {
    double slope, width;
    std::size_t count;
  };
  std::vector<Pool> st;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double w = x[k + 1] - x[k];
    st.push_back({(y[k + 1] - y[k]) / w, w, 1});
    while (st.size() >= 2 && st[st.size() - 2].slope < st.back().slope) {
      Pool top = st.back();
      st.pop_back();
      Pool& prev = st.back();
      double width = prev.width + top.width;
      prev.slope = (prev.slope * prev.width + top.slope * top.width) / width;
      prev.width = width;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(x.size());
  for (const auto& p : st) out.insert(out.end(), p.count, p.slope);
  return out;
}

}  // namespace shapetest::detail
