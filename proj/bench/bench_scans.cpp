#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "vzcert/flow.hpp"
#include "vzcert/rigidity.hpp"

// Times the three scan kernels that carry an exec policy, serial against
// parallel, and checks the two runs agree bit for bit. Optional argv[1]
// sets the worker count (0 restores the runtime default).

using namespace vzcert;
using bench_clock = std::chrono::steady_clock;

namespace {

double ms_since(bench_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(bench_clock::now() - t0).count();
}

bool row(const char* name, double serial_ms, double parallel_ms, bool agree) {
  std::printf("%-34s %10.1f %12.1f %8.2fx  %s\n", name, serial_ms, parallel_ms,
              parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0, agree ? "ok" : "MISMATCH");
  return agree;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) set_scan_threads(std::atoi(argv[1]));
  std::printf("%-34s %10s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
  bool all_agree = true;

  {
    auto m = make_model(parse_group_flat("dihedral_inf"));
    ball b = build_ball(*m, m->identity(), 900);
    qi_map q = builtin_qi(*m);
    auto t0 = bench_clock::now();
    qi_report rs = verify_qi(b, q, exec::serial);
    const double s = ms_since(t0);
    t0 = bench_clock::now();
    qi_report rp = verify_qi(b, q, exec::parallel);
    const double p = ms_since(t0);
    all_agree = row("verify_qi, dihedral B(900)", s, p, rs.json() == rp.json()) && all_agree;
  }

  {
    auto m = make_model(parse_group_flat("int_gens:1"));
    ball b = build_ball(*m, m->identity(), 256);
    quasi_action_ctx ctx = make_ctx(b, builtin_qi(*m), 60.0, 3);
    const std::vector<double> pts = point_grid(-60.0, 60.0, 0.05);
    auto t0 = bench_clock::now();
    property_report rs = check_four_properties(ctx, ctx.range_elements, pts, exec::serial);
    const double s = ms_since(t0);
    t0 = bench_clock::now();
    property_report rp = check_four_properties(ctx, ctx.range_elements, pts, exec::parallel);
    const double p = ms_since(t0);
    all_agree =
        row("four_properties, 2401 points", s, p, rs.json() == rp.json()) && all_agree;
  }

  {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    flow_network net;
    for (int i = 0; i < 14; ++i) net.add_vertex(elem{{i}});
    net.source = 0;
    net.sink = 13;
    for (int i = 0; i < 14; ++i)
      for (int j = 0; j < 14; ++j)
        if (i != j && uni(rng) < 0.6) net.add_edge_ids(i, j, 1);
    const int reps = 200;
    long long vs = 0, vp = 0;
    auto t0 = bench_clock::now();
    for (int r = 0; r < reps; ++r) vs += brute_force_min_cut(net, exec::serial);
    const double s = ms_since(t0);
    t0 = bench_clock::now();
    for (int r = 0; r < reps; ++r) vp += brute_force_min_cut(net, exec::parallel);
    const double p = ms_since(t0);
    all_agree = row("brute_min_cut, 14 verts x200", s, p, vs == vp) && all_agree;
  }

  return all_agree ? 0 : 1;
}
