#include "cbaa/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

namespace cbaa {

std::uint64_t HotColumnSet::tuple_count() const {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t n = 1;
  for (const auto& hc : perArray) {
    if (hc.empty()) return 0;
    if (n > kMax / hc.size()) return kMax;
    n *= hc.size();
  }
  return n;
}

ScratchPool::ScratchPool(std::size_t buffers, std::uint32_t g) {
  buffers = std::max<std::size_t>(buffers, 1);
  buffers_.assign(buffers, std::vector<std::uint64_t>(column_words(g)));
  for (std::size_t i = buffers; i-- > 0;) free_.push_back(i);
}

ScratchPool::Lease ScratchPool::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !free_.empty(); });
  const std::size_t slot = free_.back();
  free_.pop_back();
  return Lease(*this, slot);
}

void ScratchPool::release(std::size_t slot) {
  {
    std::lock_guard lock(mu_);
    free_.push_back(slot);
  }
  cv_.notify_one();
}

HotColumnSet find_hot_columns(const CubeOfBitsArrays& cube, std::uint32_t csIdx, double thetaBn) {
  const SketchConfig& c = cube.config();
  HotColumnSet hc;
  hc.perArray.resize(c.numRa);
  for (unsigned i = 0; i < c.numRa; ++i) {
    const auto columns = static_cast<std::uint32_t>(c.columnCount(i));
    for (std::uint32_t col = 0; col < columns; ++col) {
      if (cube.zero_count_column(csIdx, i, col) <= thetaBn) hc.perArray[i].push_back(col);
    }
  }
  return hc;
}

std::optional<SuperHostRecord> check_tuple(const CubeOfBitsArrays& cube, std::uint32_t csIdx,
                                           std::span<const std::uint32_t> tuple, double thetaBn, double epsilon,
                                           std::span<std::uint64_t> scratch) {
  const SketchConfig& c = cube.config();
  const std::optional<std::uint32_t> lp = lp_from_tuple(tuple, c);
  if (!lp) return std::nullopt;

  std::uint32_t cols[512];  // arrayCount() <= 510
  std::copy(tuple.begin(), tuple.end(), cols);
  for (unsigned j = 0; j < c.numVa; ++j) cols[c.numRa + j] = va_column_index(*lp, j, c);

  const std::uint32_t zeros = cube.union_columns_into(csIdx, std::span(cols, c.arrayCount()), scratch);
  if (zeros > thetaBn) return std::nullopt;

  SuperHostRecord rec;
  rec.ip = unmangle(MangledIp{join_ip({csIdx, *lp}, c)}, c);
  rec.estimate = corrected_estimate(zeros, epsilon, c.g);
  rec.csIdx = csIdx;
  return rec;
}

std::optional<SuperHostRecord> check_tuple(const CubeOfBitsArrays& cube, std::uint32_t csIdx,
                                           std::span<const std::uint32_t> tuple, double thetaBn, double epsilon) {
  std::vector<std::uint64_t> scratch(column_words(cube.config().g));
  return check_tuple(cube, csIdx, tuple, thetaBn, epsilon, scratch);
}

void sort_records(std::vector<SuperHostRecord>& records) {
  std::sort(records.begin(), records.end(), [](const SuperHostRecord& a, const SuperHostRecord& b) {
    if (a.estimate != b.estimate) return a.estimate > b.estimate;
    return a.ip < b.ip;
  });
}

namespace {

void dedup_by_ip(std::vector<SuperHostRecord>& records) {
  std::sort(records.begin(), records.end(),
            [](const SuperHostRecord& a, const SuperHostRecord& b) { return a.ip < b.ip; });
  records.erase(std::unique(records.begin(), records.end(),
                            [](const SuperHostRecord& a, const SuperHostRecord& b) { return a.ip == b.ip; }),
                records.end());
}

// Checks tuples [begin, end) of the mixed-radix enumeration of hc.
void check_range(const CubeOfBitsArrays& cube, std::uint32_t csIdx, const HotColumnSet& hc, std::uint64_t begin,
                 std::uint64_t end, double thetaBn, double epsilon, std::span<std::uint64_t> scratch,
                 std::vector<SuperHostRecord>& out) {
  const std::size_t n = hc.perArray.size();
  std::vector<std::size_t> digit(n);
  std::uint64_t rest = begin;
  for (std::size_t i = n; i-- > 0;) {
    digit[i] = rest % hc.perArray[i].size();
    rest /= hc.perArray[i].size();
  }
  std::vector<std::uint32_t> tuple(n);
  for (std::uint64_t t = begin; t < end; ++t) {
    for (std::size_t i = 0; i < n; ++i) tuple[i] = hc.perArray[i][digit[i]];
    if (auto rec = check_tuple(cube, csIdx, tuple, thetaBn, epsilon, scratch)) out.push_back(*rec);
    for (std::size_t i = n; i-- > 0;) {
      if (++digit[i] < hc.perArray[i].size()) break;
      digit[i] = 0;
    }
  }
}

// One sketch; tuple checks spread over `workers` threads that lease buffers from `pool`.
RecoveryResult recover_cs_with(const CubeOfBitsArrays& cube, std::uint32_t csIdx, const RecoveryOptions& options,
                               ScratchPool& pool, unsigned workers) {
  RecoveryResult result;
  const LoadEstimate load = estimate_cs_load(cube, csIdx);
  const double thetaBn = hot_threshold(options.theta, load.epsilon, cube.config().g, options.formula);
  const HotColumnSet hc = find_hot_columns(cube, csIdx, thetaBn);
  const std::uint64_t tuples = hc.tuple_count();
  if (tuples == 0) return result;
  if (tuples > options.tupleCap) {
    result.overflows.push_back({csIdx, tuples});
    return result;
  }

  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::min<std::uint64_t>(tuples, pool.size())));
  if (workers == 1) {
    auto lease = pool.acquire();
    check_range(cube, csIdx, hc, 0, tuples, thetaBn, load.epsilon, lease.buffer(), result.hosts);
  } else {
    std::vector<std::vector<SuperHostRecord>> partial(workers);
    {
      std::vector<std::jthread> threads;
      for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          const std::uint64_t begin = tuples * w / workers;
          const std::uint64_t end = tuples * (w + 1) / workers;
          auto lease = pool.acquire();
          check_range(cube, csIdx, hc, begin, end, thetaBn, load.epsilon, lease.buffer(), partial[w]);
        });
      }
    }
    for (auto& p : partial) result.hosts.insert(result.hosts.end(), p.begin(), p.end());
  }
  dedup_by_ip(result.hosts);
  return result;
}

}  // namespace

RecoveryResult recover_cs(const CubeOfBitsArrays& cube, std::uint32_t csIdx, const RecoveryOptions& options) {
  const unsigned workers = std::max(options.workers, 1u);
  ScratchPool pool(workers, cube.config().g);
  RecoveryResult result = recover_cs_with(cube, csIdx, options, pool, workers);
  sort_records(result.hosts);
  return result;
}

RecoveryResult recover_all(const CubeOfBitsArrays& cube, const RecoveryOptions& options) {
  const std::uint32_t sketches = cube.config().sketchCount();
  const unsigned workers = static_cast<unsigned>(std::clamp<std::uint32_t>(options.workers, 1, sketches));
  ScratchPool pool(workers, cube.config().g);

  std::vector<RecoveryResult> perCs(sketches);
  std::atomic<std::uint32_t> next{0};
  auto run = [&] {
    for (std::uint32_t cs; (cs = next.fetch_add(1, std::memory_order_relaxed)) < sketches;)
      perCs[cs] = recover_cs_with(cube, cs, options, pool, 1);
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run);
  }

  RecoveryResult all;
  for (auto& r : perCs) {
    all.hosts.insert(all.hosts.end(), r.hosts.begin(), r.hosts.end());
    all.overflows.insert(all.overflows.end(), r.overflows.begin(), r.overflows.end());
  }
  dedup_by_ip(all.hosts);
  sort_records(all.hosts);
  return all;
}

}  // namespace cbaa
