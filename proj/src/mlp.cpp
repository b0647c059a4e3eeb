#include "mlppde/mlp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mlppde {

namespace {

constexpr std::uint64_t kTerminalBlock = 256;
constexpr std::uint64_t kUniformSlot = 0;
constexpr std::uint64_t kGaussSlot = 1;

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::runtime_error(std::string(what) + ": 64-bit counter overflow");
  return r;
}
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::runtime_error(std::string(what) + ": 64-bit counter overflow");
  return r;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, const char* what) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base, what);
  return r;
}

// Fixed-shape summation: the tree depends only on the length, never on
// thread count or data, so results are reproducible by construction.
double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < v.size(); ++i) s += v[i];
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct Frame {
  std::vector<double> z;
  std::vector<double> xn;
  std::vector<double> vals;
  std::vector<double> partials;
};

struct Workspace {
  std::vector<Frame> frames;
  // Frames must be preallocated before the recursion starts: callers hold
  // Frame references across nested calls, so the vector must never grow
  // mid-recursion.
  void ensure_depth(int max_depth) {
    if (frames.size() < static_cast<std::size_t>(max_depth) + 1)
      frames.resize(static_cast<std::size_t>(max_depth) + 1);
  }
  Frame& frame(int depth) { return frames[static_cast<std::size_t>(depth)]; }
};

struct Ctx {
  const SemilinearProblem& p;
  std::uint64_t M;
  bool hoist_f0;
  double f0 = 0.0; // used only when hoist_f0
};

double mlp_value(const Ctx& ctx, double t, std::span<const double> x, int n,
                 const StreamKey& key, CostLedger& led, Workspace& ws, int depth);

// One summand of the terminal sum: g(X_{0,t,x}) + t*f(0), stream (0, -m).
double terminal_summand(const Ctx& ctx, double t, std::span<const double> x,
                        const StreamKey& key0, std::uint64_t m, CostLedger& led,
                        Workspace& ws, int depth) {
  Frame& fr = ws.frame(depth);
  fr.z.resize(x.size());
  fr.xn.resize(x.size());
  const StreamKey k = key0.child(-static_cast<std::int64_t>(m));
  gaussian_fill(k, kGaussSlot, fr.z, led);
  sample_transition(ctx.p.diffusion, 0.0, t, x, fr.z, fr.xn);
  const double gv = evaluate_g(ctx.p, fr.xn, led);
  const double f0 = ctx.hoist_f0 ? ctx.f0 : evaluate_f(ctx.p, 0.0, led);
  return gv + t * f0;
}

// One summand of the level-k sum: f(U_k at (tR, X)) - f(U_{k-1} at (tR, X)),
// where R, X come from stream (k, m) and the nested keys are (k, m), (-k, m).
double level_summand(const Ctx& ctx, double t, std::span<const double> x, int k,
                     const StreamKey& key_k, const StreamKey& key_negk, std::uint64_t m,
                     CostLedger& led, Workspace& ws, int depth) {
  Frame& fr = ws.frame(depth);
  fr.z.resize(x.size());
  fr.xn.resize(x.size());
  const StreamKey k_pos = key_k.child(static_cast<std::int64_t>(m));
  const StreamKey k_neg = key_negk.child(static_cast<std::int64_t>(m));
  const double r = uniform01(k_pos, kUniformSlot, led);
  gaussian_fill(k_pos, kGaussSlot, fr.z, led);
  const double tr = t * r;
  sample_transition(ctx.p.diffusion, tr, t, x, fr.z, fr.xn);
  const double u_hi = mlp_value(ctx, tr, fr.xn, k, k_pos, led, ws, depth + 1);
  const double u_lo = mlp_value(ctx, tr, fr.xn, k - 1, k_neg, led, ws, depth + 1);
  return evaluate_f(ctx.p, u_hi, led) - evaluate_f(ctx.p, u_lo, led);
}

// Centered blocked mean over summands 1..W: anchor v1 = eval(1), then
// pairwise-summed blocks of (eval(m) - v1). The centering makes the mean of
// identical summands exact, which is what the degenerate and t=0 exactness
// guarantees rest on.
template <class Eval>
double blocked_mean(std::uint64_t W, std::uint64_t block, Frame& fr, Eval&& eval) {
  const double v1 = eval(1);
  if (!std::isfinite(v1))
    throw std::runtime_error("mlp: non-finite intermediate value (f may have left its declared working interval)");
  fr.partials.clear();
  for (std::uint64_t m0 = 2; m0 <= W; m0 += block) {
    const std::uint64_t cnt = std::min<std::uint64_t>(block, W - m0 + 1);
    fr.vals.resize(cnt);
    for (std::uint64_t j = 0; j < cnt; ++j) {
      const double v = eval(m0 + j);
      if (!std::isfinite(v))
        throw std::runtime_error("mlp: non-finite intermediate value (f may have left its declared working interval)");
      fr.vals[j] = v - v1;
    }
    fr.partials.push_back(pairwise_sum(fr.vals));
  }
  return v1 + pairwise_sum(fr.partials) / static_cast<double>(W);
}

double mlp_value(const Ctx& ctx, double t, std::span<const double> x, int n,
                 const StreamKey& key, CostLedger& led, Workspace& ws, int depth) {
  if (n == 0) return 0.0;
  Frame& fr = ws.frame(depth);
  fr.z.resize(x.size());
  fr.xn.resize(x.size());

  // Terminal sum, M^n summands.
  const std::uint64_t W = checked_pow(ctx.M, n, "mlp");
  const StreamKey key0 = key.child(0);
  double value = blocked_mean(W, kTerminalBlock, fr, [&](std::uint64_t m) {
    return terminal_summand(ctx, t, x, key0, m, led, ws, depth);
  });

  // Level sums k = 1..n-1, M^(n-k) summands each, scaled by t.
  for (int k = 1; k < n; ++k) {
    const std::uint64_t Wk = checked_pow(ctx.M, n - k, "mlp");
    const StreamKey key_k = key.child(k);
    const StreamKey key_negk = key.child(-k);
    const double mean_k = blocked_mean(Wk, 1, fr, [&](std::uint64_t m) {
      return level_summand(ctx, t, x, k, key_k, key_negk, m, led, ws, depth);
    });
    value += t * mean_k;
  }
  return value;
}

void validate_inputs(const SemilinearProblem& p, double t, std::span<const double> x,
                     MlpLevel level, const MlpOptions& opt) {
  p.validate();
  if (x.size() != static_cast<std::size_t>(p.dimension))
    throw std::invalid_argument("mlp: evaluation point has wrong dimension");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("mlp: non-finite evaluation point");
  if (!(t >= 0.0) || t > p.horizon)
    throw std::invalid_argument("mlp: need 0 <= t <= T");
  if (level.n < 0) throw std::invalid_argument("mlp: level.n must be >= 0");
  if (level.M < 1) throw std::invalid_argument("mlp: level.M must be >= 1");
  if (level.n > opt.depth_guard)
    throw std::invalid_argument("mlp: depth guard exceeded (n = " + std::to_string(level.n) +
                                " > " + std::to_string(opt.depth_guard) + ")");
  predict_cost(level, p.dimension); // rejects runs whose cost cannot be counted
}

// --- parallel driver ---------------------------------------------------------

struct Block {
  int k;              // 0 = terminal, else level index
  std::uint64_t m0;   // first summand (inclusive)
  std::uint64_t m1;   // last summand (inclusive)
  std::size_t slot;   // partial index within the term
};

struct TermAccum {
  double v1 = 0.0;
  std::uint64_t W = 0;
  std::vector<double> partials;
};

double run_blocks(const Ctx& ctx, double t, std::span<const double> x, int n,
                  const StreamKey& key, CostLedger& ledger, int threads) {
  const StreamKey key0 = key.child(0);
  std::vector<StreamKey> key_k(n), key_negk(n);
  for (int k = 1; k < n; ++k) {
    key_k[k] = key.child(k);
    key_negk[k] = key.child(-k);
  }

  std::vector<TermAccum> terms(n); // index 0 = terminal, k = level k
  std::vector<Block> heads, blocks;
  for (int k = 0; k < n; ++k) {
    const std::uint64_t W = checked_pow(ctx.M, k == 0 ? n : n - k, "mlp");
    terms[k].W = W;
    heads.push_back({k, 1, 1, 0});
    const std::uint64_t B = (k == 0) ? kTerminalBlock : 1;
    std::size_t slot = 0;
    for (std::uint64_t m0 = 2; m0 <= W; m0 += B)
      blocks.push_back({k, m0, std::min(m0 + B - 1, W), slot++});
    terms[k].partials.assign(slot, 0.0);
  }

  auto eval_summand = [&](int k, std::uint64_t m, CostLedger& led, Workspace& ws) {
    const double v = (k == 0)
                         ? terminal_summand(ctx, t, x, key0, m, led, ws, 0)
                         : level_summand(ctx, t, x, k, key_k[k], key_negk[k], m, led, ws, 0);
    if (!std::isfinite(v))
      throw std::runtime_error("mlp: non-finite intermediate value (f may have left its declared working interval)");
    return v;
  };

  const int nthreads = std::max(1, threads);
  std::vector<CostLedger> worker_ledgers(nthreads);
  std::vector<Workspace> worker_ws(nthreads);
  for (auto& ws : worker_ws) ws.ensure_depth(n);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_wave = [&](auto&& work, std::size_t count) {
    std::atomic<std::size_t> next{0};
    auto loop = [&](int wid) {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          work(i, wid);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    };
    if (nthreads == 1) {
      loop(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(nthreads);
      for (int w = 0; w < nthreads; ++w) pool.emplace_back(loop, w);
      for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
  };

  // Wave A: anchors v1 per term. Wave B: centered blocks.
  run_wave([&](std::size_t i, int wid) {
    const Block& b = heads[i];
    terms[b.k].v1 = eval_summand(b.k, 1, worker_ledgers[wid], worker_ws[wid]);
  }, heads.size());

  run_wave([&](std::size_t i, int wid) {
    const Block& b = blocks[i];
    Workspace& ws = worker_ws[wid];
    const double v1 = terms[b.k].v1;
    const std::size_t cnt = static_cast<std::size_t>(b.m1 - b.m0 + 1);
    std::vector<double> diffs(cnt);
    for (std::size_t j = 0; j < cnt; ++j)
      diffs[j] = eval_summand(b.k, b.m0 + j, worker_ledgers[wid], ws) - v1;
    terms[b.k].partials[b.slot] = pairwise_sum(diffs);
  }, blocks.size());

  for (const auto& led : worker_ledgers) ledger += led;

  double value = terms[0].v1 + pairwise_sum(terms[0].partials) / static_cast<double>(terms[0].W);
  for (int k = 1; k < n; ++k) {
    const double mean_k =
        terms[k].v1 + pairwise_sum(terms[k].partials) / static_cast<double>(terms[k].W);
    value += t * mean_k;
  }
  return value;
}

double estimate_impl(const SemilinearProblem& problem, double t, std::span<const double> x,
                     MlpLevel level, const StreamKey& key, CostLedger& ledger, int threads,
                     const MlpOptions& options) {
  validate_inputs(problem, t, x, level, options);
  if (level.n == 0) return 0.0;

  Ctx ctx{problem, level.M, options.hoist_f0};
  if (options.hoist_f0) {
    ctx.f0 = evaluate_f(problem, 0.0, ledger);
  }
  return run_blocks(ctx, t, x, level.n, key, ledger, threads);
}

} // namespace

double mlp_estimate(const SemilinearProblem& problem, double t, std::span<const double> x,
                    MlpLevel level, const StreamKey& key, CostLedger& ledger,
                    const MlpOptions& options) {
  return estimate_impl(problem, t, x, level, key, ledger, 1, options);
}

EstimateRecord mlp_estimate_parallel(const SemilinearProblem& problem, double t,
                                     std::span<const double> x, MlpLevel level,
                                     const StreamKey& key, int threads,
                                     const MlpOptions& options) {
  EstimateRecord rec;
  rec.level = level;
  rec.root_seed = key.root_seed;
  rec.problem_id = problem.id;
  rec.t = t;
  rec.x.assign(x.begin(), x.end());
  rec.threads = std::max(1, threads);

  const auto t0 = std::chrono::steady_clock::now();
  rec.value = estimate_impl(problem, t, x, level, key, rec.ledger, rec.threads, options);
  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  return rec;
}

CostLedger predict_cost(MlpLevel level, int dimension) {
  if (level.n < 0) throw std::invalid_argument("predict_cost: n must be >= 0");
  if (level.M < 1) throw std::invalid_argument("predict_cost: M must be >= 1");
  if (dimension < 1) throw std::invalid_argument("predict_cost: dimension must be >= 1");
  const char* what = "predict_cost";
  const std::uint64_t d = static_cast<std::uint64_t>(dimension);
  const int n = level.n;

  std::vector<std::uint64_t> fe(n + 1, 0), ge(n + 1, 0), dr(n + 1, 0);
  for (int j = 1; j <= n; ++j) {
    const std::uint64_t Mj = checked_pow(level.M, j, what);
    std::uint64_t f = Mj, g = Mj, r = checked_mul(Mj, d, what);
    for (int k = 1; k < j; ++k) {
      const std::uint64_t Mjk = checked_pow(level.M, j - k, what);
      f = checked_add(f, checked_mul(Mjk, checked_add(2, checked_add(fe[k], fe[k - 1], what), what), what), what);
      g = checked_add(g, checked_mul(Mjk, checked_add(ge[k], ge[k - 1], what), what), what);
      r = checked_add(r, checked_mul(Mjk, checked_add(d + 1, checked_add(dr[k], dr[k - 1], what), what), what), what);
    }
    fe[j] = f;
    ge[j] = g;
    dr[j] = r;
  }
  return CostLedger{fe[n], ge[n], dr[n]};
}

MlpLevel theorem_schedule(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("theorem_schedule: epsilon must be in (0, 1]");
  const int n = static_cast<int>(std::ceil(std::log(1.0 / epsilon))) + 1;
  return MlpLevel{n, static_cast<std::uint64_t>(n)};
}

} // namespace mlppde
