#include "omtree/rng.hpp"
#include "omtree/error.hpp"

#include <cmath>

namespace omtree {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::InvalidInterval: return "invalid interval";
    case ErrorCode::UndefinedRate: return "undefined rate";
    case ErrorCode::CounterInconsistency: return "counter inconsistency";
    case ErrorCode::ProbeInconsistency: return "probe inconsistency";
    case ErrorCode::InvalidPath: return "invalid path";
    case ErrorCode::DisconnectedGraph: return "disconnected graph";
    case ErrorCode::InvalidTask: return "invalid task";
    case ErrorCode::InvalidAction: return "invalid action";
    case ErrorCode::InvalidTree: return "invalid tree";
    case ErrorCode::CountMismatch: return "count mismatch";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::BudgetExceeded: return "budget exceeded";
    case ErrorCode::NotReady: return "not ready";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::Checksum: return "checksum mismatch";
    case ErrorCode::Parse: return "parse error";
  }
  return "unknown error";
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
  // FNV-1a over the label, then mixed with master and index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ h) + index);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Box-Muller; one value per call keeps the stream position simple.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace omtree
