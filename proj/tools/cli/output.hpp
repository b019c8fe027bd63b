#pragma once

#include <atomic>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ceqcli {

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

std::string cell(double x);
std::string cell(int x);
std::string cell_flag(bool x);

/// A failed sweep point: which point, the exit status it maps to, and why.
struct PointError {
  std::string point;
  std::string kind;
  std::string message;
  int exit_code = 3;
};

PointError describe(std::exception_ptr error, std::string point);

struct RunOutput {
  std::vector<Table> tables;
  std::vector<PointError> errors;
  std::vector<std::string> summary;
};

std::string sha256_hex(const std::string& data);

/// Runs f(0..n-1) on up to `workers` threads; each index is claimed from a
/// shared counter. f must not throw.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f) {
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) f(i);
  };
  const std::size_t nw = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (nw <= 1) {
    body();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

}  // namespace ceqcli
