// Monte Carlo oracles: Feynman-Kac for linear problems and the Cole-Hopf
// log-expectation. Accumulation uses the same centered blocked pairwise
// scheme as the solver, so values are independent of thread count.

#include "mlppde/oracles.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mlppde {

namespace {

constexpr std::uint64_t kMcBlock = 4096;

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

// Deterministic blocked mean/variance over eval(1..N, ledger): anchor on the
// first sample, pairwise-sum centered values and their squares per block,
// combine block partials pairwise in block order.
template <class Eval>
McEstimate mc_accumulate(std::uint64_t N, int threads, CostLedger& ledger, Eval&& eval) {
  struct Partial {
    double s1 = 0.0, s2 = 0.0;
  };
  const double v1 = eval(1, ledger);

  const std::uint64_t nblocks = (N - 1 + kMcBlock - 1) / kMcBlock;
  std::vector<Partial> partials(nblocks);

  const int nthreads = std::max(1, threads);
  std::vector<CostLedger> worker_ledgers(nthreads);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  auto worker = [&](int wid) {
    std::vector<double> d1, d2;
    try {
      for (std::uint64_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
        const std::uint64_t m0 = 2 + b * kMcBlock;
        const std::uint64_t cnt = std::min<std::uint64_t>(kMcBlock, N - m0 + 1);
        d1.resize(cnt);
        d2.resize(cnt);
        for (std::uint64_t j = 0; j < cnt; ++j) {
          const double v = eval(m0 + j, worker_ledgers[wid]) - v1;
          d1[j] = v;
          d2[j] = v * v;
        }
        partials[b] = {pairwise_sum(d1), pairwise_sum(d2)};
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mutex);
      if (!err) err = std::current_exception();
    }
  };

  if (nthreads == 1 || nblocks <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  for (const auto& wl : worker_ledgers) ledger += wl;

  std::vector<double> s1(nblocks), s2(nblocks);
  for (std::uint64_t b = 0; b < nblocks; ++b) {
    s1[b] = partials[b].s1;
    s2[b] = partials[b].s2;
  }
  const double S1 = pairwise_sum(s1);
  const double S2 = pairwise_sum(s2);
  const double nd = static_cast<double>(N);
  const double delta = S1 / nd;
  const double var = std::max(0.0, (S2 - nd * delta * delta) / (nd - 1.0));

  McEstimate e;
  e.mean = v1 + delta;
  e.std_error = std::sqrt(var / nd);
  e.samples = N;
  return e;
}

} // namespace

McEstimate feynman_kac(const SemilinearProblem& problem, double t,
                       std::span<const double> x, std::uint64_t samples,
                       const StreamKey& key, CostLedger& ledger,
                       const FeynmanKacOptions& options) {
  problem.validate();
  if (samples < 2) throw std::invalid_argument("feynman_kac: need samples >= 2");
  if (x.size() != static_cast<std::size_t>(problem.dimension))
    throw std::invalid_argument("feynman_kac: evaluation point has wrong dimension");
  if (!(t >= 0.0) || t > problem.horizon)
    throw std::invalid_argument("feynman_kac: need 0 <= t <= T");
  if (!options.source && problem.nonlinearity.name != "zero")
    throw std::invalid_argument(
        "feynman_kac: nonlinearity depends on u; only f == 0 or an explicit "
        "source term f(t,x) is admissible (use mlp_estimate otherwise)");
  const int K = options.source ? std::max(1, options.time_steps) : 1;
  const std::size_t d = x.size();

  auto eval = [&](std::uint64_t m, CostLedger& led) {
    thread_local std::vector<double> z, xa, xb;
    z.resize(d);
    xa.assign(x.begin(), x.end());
    xb.resize(d);
    if (!options.source) {
      gaussian_fill(key, m, z, led);
      sample_transition(problem.diffusion, 0.0, t, xa, z, xb);
      return evaluate_g(problem, xb, led);
    }
    // Midpoints tau_j = (j + 1/2) t/K, then the terminal point t.
    double source_sum = 0.0;
    double s_prev = 0.0;
    const std::uint64_t slot0 = m * static_cast<std::uint64_t>(K + 1);
    for (int j = 0; j < K; ++j) {
      const double s_next = (j + 0.5) * t / K;
      gaussian_fill(key, slot0 + j, z, led);
      sample_transition(problem.diffusion, s_prev, s_next, xa, z, xb);
      xa.swap(xb);
      source_sum += options.source(s_next, xa);
      s_prev = s_next;
    }
    gaussian_fill(key, slot0 + K, z, led);
    sample_transition(problem.diffusion, s_prev, t, xa, z, xb);
    return evaluate_g(problem, xb, led) + (t / K) * source_sum;
  };

  return mc_accumulate(samples, options.threads, ledger, eval);
}

McEstimate cole_hopf_hjb(const std::function<double(std::span<const double>)>& g,
                         double lambda, double tau, std::span<const double> x,
                         std::uint64_t samples, const StreamKey& key, CostLedger& ledger,
                         int threads) {
  if (!(lambda > 0.0)) throw std::invalid_argument("cole_hopf: lambda must be > 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("cole_hopf: tau must be >= 0");
  if (samples < 2) throw std::invalid_argument("cole_hopf: need samples >= 2");
  const std::size_t d = x.size();
  const double scale = std::sqrt(2.0 * tau);

  auto eval = [&](std::uint64_t m, CostLedger& led) {
    thread_local std::vector<double> z, xs;
    z.resize(d);
    xs.resize(d);
    gaussian_fill(key, m, z, led);
    for (std::size_t i = 0; i < d; ++i) xs[i] = x[i] + scale * z[i];
    led.g_evals += 1;
    const double y = std::exp(-lambda * g(xs));
    if (!std::isfinite(y))
      throw std::runtime_error(
          "cole_hopf: exp overflow in the transformed payoff; rescale g or reduce lambda");
    return y;
  };

  const McEstimate inner = mc_accumulate(samples, threads, ledger, eval);
  if (!(inner.mean > 0.0) || !std::isfinite(inner.mean))
    throw std::runtime_error(
        "cole_hopf: transformed expectation underflowed to zero; rescale g or reduce lambda");

  McEstimate out;
  out.mean = -std::log(inner.mean) / lambda;
  // Delta method through u = -log(mu)/lambda.
  out.std_error = inner.std_error / (lambda * inner.mean);
  out.samples = samples;
  return out;
}

} // namespace mlppde
