#pragma once

#include <map>
#include <string>
#include <vector>

#include "synsrl/model/encoder.hpp"
#include "synsrl/tensor/checkpoint.hpp"

namespace synsrl::train {

// Adadelta over a named parameter set. Accumulators are kept per parameter
// and stepped in name order, so updates are deterministic.
template <class T>
class Adadelta {
 public:
  explicit Adadelta(double rho = 0.95, double eps = 1e-6, double lr = 1.0)
      : rho_(rho), eps_(eps), lr_(lr) {}

  void attach(const model::Params<T>& params) {
    acc_.clear();
    for (const auto& [name, t] : params.by_name) {
      acc_[name] = Acc{std::vector<T>(static_cast<size_t>(t.numel()), T(0)),
                       std::vector<T>(static_cast<size_t>(t.numel()), T(0))};
    }
  }

  void step(model::Params<T>& params) {
    const auto& K = kernels::active<T>();
    for (auto& [name, t] : params.by_name) {
      auto it = acc_.find(name);
      if (it == acc_.end()) {
        throw Error("optimizer has no state for parameter " + name);
      }
      K.adadelta_step(t.raw().data(), t.grad_buf().data(),
                      it->second.g2.data(), it->second.dx2.data(),
                      static_cast<T>(rho_), static_cast<T>(eps_),
                      static_cast<T>(lr_), t.numel());
    }
  }

  void to_archive(nn::Archive& a) const {
    for (const auto& [name, acc] : acc_) {
      std::vector<double> g2(acc.g2.begin(), acc.g2.end());
      std::vector<double> dx2(acc.dx2.begin(), acc.dx2.end());
      a.put_f64("opt/" + name + "/g2",
                {static_cast<int64_t>(g2.size())}, g2);
      a.put_f64("opt/" + name + "/dx2",
                {static_cast<int64_t>(dx2.size())}, dx2);
    }
  }

  void from_archive(const nn::Archive& a) {
    for (auto& [name, acc] : acc_) {
      const auto& g2 = a.get_f64("opt/" + name + "/g2").values;
      const auto& dx2 = a.get_f64("opt/" + name + "/dx2").values;
      if (g2.size() != acc.g2.size() || dx2.size() != acc.dx2.size()) {
        throw Error("optimizer state size mismatch for " + name);
      }
      for (size_t i = 0; i < g2.size(); ++i) {
        acc.g2[i] = static_cast<T>(g2[i]);
        acc.dx2[i] = static_cast<T>(dx2[i]);
      }
    }
  }

  double rho() const { return rho_; }
  double eps() const { return eps_; }
  double lr() const { return lr_; }

 private:
  struct Acc {
    std::vector<T> g2;
    std::vector<T> dx2;
  };
  double rho_, eps_, lr_;
  std::map<std::string, Acc> acc_;
};

}  // namespace synsrl::train
