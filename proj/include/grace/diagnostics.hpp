#pragma once

// Process-wide record of solver certificates. Every lasso fit logs its KKT
// violation and every Grace fit its relative normal-equation residual, so a
// test harness can assert on the worst case seen across a whole run.

#include <atomic>
#include <cstdint>

namespace grace::diagnostics {

struct CertificateSummary {
  std::uint64_t lasso_fits = 0;
  double max_kkt_violation = 0.0;
  std::uint64_t grace_fits = 0;
  double max_relative_residual = 0.0;
};

namespace detail {

struct CertificateLog {
  std::atomic<std::uint64_t> lasso_fits{0};
  std::atomic<double> max_kkt{0.0};
  std::atomic<std::uint64_t> grace_fits{0};
  std::atomic<double> max_residual{0.0};
};

inline CertificateLog& log() {
  static CertificateLog instance;
  return instance;
}

inline void raise_to(std::atomic<double>& slot, double value) {
  double current = slot.load(std::memory_order_relaxed);
  while (value > current && !slot.compare_exchange_weak(current, value, std::memory_order_relaxed)) {
  }
}

}  // namespace detail

inline void record_lasso(double kkt_violation) {
  detail::log().lasso_fits.fetch_add(1, std::memory_order_relaxed);
  detail::raise_to(detail::log().max_kkt, kkt_violation);
}

inline void record_grace(double relative_residual) {
  detail::log().grace_fits.fetch_add(1, std::memory_order_relaxed);
  detail::raise_to(detail::log().max_residual, relative_residual);
}

inline CertificateSummary certificates() {
  auto& l = detail::log();
  return {l.lasso_fits.load(), l.max_kkt.load(), l.grace_fits.load(), l.max_residual.load()};
}

inline void reset_certificates() {
  auto& l = detail::log();
  l.lasso_fits = 0;
  l.max_kkt = 0.0;
  l.grace_fits = 0;
  l.max_residual = 0.0;
}

}  // namespace grace::diagnostics
