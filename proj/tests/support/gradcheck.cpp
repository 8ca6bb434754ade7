#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bhs/ad/ops.hpp"

namespace bhs::testing {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(ad::ParameterStore& store,
                           const std::function<ad::Var(ad::Graph&)>& loss, double h,
                           ad::Mode mode, std::uint64_t seed) {
  store.zero_grad();
  {
    ad::Graph g(mode, seed);
    g.backward(loss(g));
  }
  auto evaluate = [&] {
    ad::Graph g(mode, seed);
    return loss(g).value()[0];
  };
  GradCheckResult result;
  for (std::size_t p = 0; p < store.size(); ++p) {
    ad::Parameter& param = store[p];
    const std::vector<double> analytic = param.grad.values();
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double saved = param.value[i];
      param.value[i] = saved + h;
      const double plus = evaluate();
      param.value[i] = saved - h;
      const double minus = evaluate();
      param.value[i] = saved;
      const double err = relative_error(analytic[i], (plus - minus) / (2 * h));
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = param.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

ad::Var random_projection(ad::Graph& g, const ad::Var& out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ad::sum(ad::mul(out, g.constant(random_tensor(out.shape(), rng))));
}

ad::Tensor random_tensor(const ad::Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ad::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = u(rng);
  }
  return t;
}

}  // namespace bhs::testing
