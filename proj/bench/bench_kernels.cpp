#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "homocl/kernels.hpp"

namespace k = homocl::kernels;

namespace {

std::vector<double> randn(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

double time_ms(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double ref, double par) {
  std::printf("%-22s reference %9.3f ms   parallel %9.3f ms   speedup %5.2fx\n", name, ref, par, ref / par);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", k::max_threads());
  const std::size_t batch = 128;

  const k::ConvGeom g{32, 32, 8, 16};
  auto in = randn(batch * g.in_size(), 1), w = randn(g.weight_size(), 2), b = randn(g.outChannels, 3);
  std::vector<double> out(batch * g.out_size());
  auto gout = randn(out.size(), 4);
  std::vector<double> gin(in.size()), gw(w.size()), gb(b.size());
  row("conv3x3_forward", time_ms([&] { k::reference::conv3x3_forward(g, batch, in, w, b, out); }, 5),
      time_ms([&] { k::conv3x3_forward(g, batch, in, w, b, out); }, 5));
  row("conv3x3_backward", time_ms([&] { k::reference::conv3x3_backward(g, batch, in, w, gout, gin, gw, gb); }, 5),
      time_ms([&] { k::conv3x3_backward(g, batch, in, w, gout, gin, gw, gb); }, 5));

  const std::size_t di = 128, dout = 128;
  auto x = randn(batch * di, 5), dw = randn(dout * di, 6), db = randn(dout, 7);
  std::vector<double> y(batch * dout);
  auto gy = randn(y.size(), 8);
  std::vector<double> gx(x.size()), gdw(dw.size()), gdb(db.size());
  row("dense_forward", time_ms([&] { k::reference::dense_forward(batch, di, dout, x, dw, db, y); }, 50),
      time_ms([&] { k::dense_forward(batch, di, dout, x, dw, db, y); }, 50));
  row("dense_backward", time_ms([&] { k::reference::dense_backward(batch, di, dout, x, dw, gy, gx, gdw, gdb); }, 50),
      time_ms([&] { k::dense_backward(batch, di, dout, x, dw, gy, gx, gdw, gdb); }, 50));

  const std::size_t m = 256, d = 128;
  auto z = randn(m * d, 9);
  std::vector<double> s(m * m);
  row("gram", time_ms([&] { k::reference::gram(m, d, z, s); }, 50), time_ms([&] { k::gram(m, d, z, s); }, 50));

  const std::size_t pts = 4096, cents = 20, dim = 64;
  auto px = randn(pts * dim, 10), pc = randn(cents * dim, 11);
  std::vector<double> dist(pts * cents);
  row("squared_distances", time_ms([&] { k::reference::squared_distances(pts, cents, dim, px, pc, dist); }, 20),
      time_ms([&] { k::squared_distances(pts, cents, dim, px, pc, dist); }, 20));
  return 0;
}
