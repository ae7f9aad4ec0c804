#include <cmath>

#include "doctest.h"
#include "homocl/kernels.hpp"
#include "test_util.hpp"

namespace k = homocl::kernels;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("conv3x3 parallel matches reference") {
  const k::ConvGeom g{6, 5, 3, 4};
  const std::size_t batch = 3;
  const auto in = gaussian(batch * g.in_size(), 1), w = gaussian(g.weight_size(), 2), b = gaussian(4, 3);
  std::vector<double> o1(batch * g.out_size()), o2(o1.size());
  k::conv3x3_forward(g, batch, in, w, b, o1);
  k::reference::conv3x3_forward(g, batch, in, w, b, o2);
  CHECK(max_abs_diff(o1, o2) < 1e-12);

  const auto gout = gaussian(o1.size(), 4);
  std::vector<double> gi1(in.size()), gi2(in.size()), gw1(w.size()), gw2(w.size()), gb1(4), gb2(4);
  k::conv3x3_backward(g, batch, in, w, gout, gi1, gw1, gb1);
  k::reference::conv3x3_backward(g, batch, in, w, gout, gi2, gw2, gb2);
  CHECK(max_abs_diff(gi1, gi2) < 1e-12);
  CHECK(max_abs_diff(gw1, gw2) < 1e-12);
  CHECK(max_abs_diff(gb1, gb2) < 1e-12);

  // first-layer call without an input gradient
  CHECK_NOTHROW(k::conv3x3_backward(g, batch, in, w, gout, {}, gw1, gb1));
}

TEST_CASE("conv3x3 hand example: centre tap copies the input") {
  const k::ConvGeom g{3, 3, 1, 1};
  std::vector<double> in{1, 2, 3, 4, 5, 6, 7, 8, 9}, w(9, 0.0), b{0.5}, out(9);
  w[4] = 2.0;
  k::conv3x3_forward(g, 1, in, w, b, out);
  for (std::size_t i = 0; i < 9; ++i) CHECK(out[i] == doctest::Approx(2.0 * in[i] + 0.5));
  // all-ones kernel on the corner sees four pixels (zero padding)
  std::fill(w.begin(), w.end(), 1.0);
  const std::vector<double> zero{0.0};
  k::conv3x3_forward(g, 1, in, w, zero, out);
  CHECK(out[0] == doctest::Approx(1 + 2 + 4 + 5));
  CHECK(out[4] == doctest::Approx(45));
}

TEST_CASE("average pooling and its adjoint") {
  const std::size_t h = 4, w = 6, c = 2, batch = 2;
  const auto in = gaussian(batch * h * w * c, 5);
  std::vector<double> o1(batch * h * w * c / 4), o2(o1.size());
  k::avgpool2_forward(h, w, c, batch, in, o1);
  k::reference::avgpool2_forward(h, w, c, batch, in, o2);
  CHECK(max_abs_diff(o1, o2) < 1e-14);
  CHECK(o1[0] == doctest::Approx((in[0] + in[c] + in[w * c] + in[w * c + c]) / 4));

  // <pool(x), y> == <x, pool^T(y)>
  const auto y = gaussian(o1.size(), 6);
  std::vector<double> gx1(in.size()), gx2(in.size());
  k::avgpool2_backward(h, w, c, batch, y, gx1);
  k::reference::avgpool2_backward(h, w, c, batch, y, gx2);
  CHECK(max_abs_diff(gx1, gx2) < 1e-14);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < o1.size(); ++i) lhs += o1[i] * y[i];
  for (std::size_t i = 0; i < in.size(); ++i) rhs += in[i] * gx1[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("dense parallel matches reference") {
  const std::size_t batch = 5, di = 7, dout = 4;
  const auto x = gaussian(batch * di, 7), w = gaussian(dout * di, 8), b = gaussian(dout, 9);
  std::vector<double> y1(batch * dout), y2(y1.size());
  k::dense_forward(batch, di, dout, x, w, b, y1);
  k::reference::dense_forward(batch, di, dout, x, w, b, y2);
  CHECK(max_abs_diff(y1, y2) < 1e-12);
  const auto gy = gaussian(y1.size(), 10);
  std::vector<double> gx1(x.size()), gx2(x.size()), gw1(w.size()), gw2(w.size()), gb1(dout), gb2(dout);
  k::dense_backward(batch, di, dout, x, w, gy, gx1, gw1, gb1);
  k::reference::dense_backward(batch, di, dout, x, w, gy, gx2, gw2, gb2);
  CHECK(max_abs_diff(gx1, gx2) < 1e-12);
  CHECK(max_abs_diff(gw1, gw2) < 1e-12);
  CHECK(max_abs_diff(gb1, gb2) < 1e-12);
}

TEST_CASE("gram and squared distances") {
  const std::size_t m = 9, d = 4;
  const auto a = gaussian(m * d, 11);
  std::vector<double> g1(m * m), g2(m * m);
  k::gram(m, d, a, g1);
  k::reference::gram(m, d, a, g2);
  CHECK(max_abs_diff(g1, g2) < 1e-12);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) CHECK(g1[i * m + j] == g1[j * m + i]);

  const auto c = gaussian(3 * d, 12);
  std::vector<double> d1(m * 3), d2(m * 3);
  k::squared_distances(m, 3, d, a, c, d1);
  k::reference::squared_distances(m, 3, d, a, c, d2);
  CHECK(max_abs_diff(d1, d2) < 1e-12);
  for (double v : d1) CHECK(v >= 0.0);
}

TEST_CASE("kernel output does not depend on the thread count") {
  const int saved = k::max_threads();
  const k::ConvGeom g{8, 8, 4, 6};
  const std::size_t batch = 7;
  const auto in = gaussian(batch * g.in_size(), 13), w = gaussian(g.weight_size(), 14), b = gaussian(6, 15);
  const auto gout = gaussian(batch * g.out_size(), 16);
  auto run = [&](int threads) {
    k::set_threads(threads);
    std::vector<double> out(batch * g.out_size()), gi(in.size()), gw(w.size()), gb(6);
    k::conv3x3_forward(g, batch, in, w, b, out);
    k::conv3x3_backward(g, batch, in, w, gout, gi, gw, gb);
    out.insert(out.end(), gi.begin(), gi.end());
    out.insert(out.end(), gw.begin(), gw.end());
    out.insert(out.end(), gb.begin(), gb.end());
    return out;
  };
  const auto one = run(1);
  const auto four = run(4);
  k::set_threads(saved);
  CHECK(one == four);
}
