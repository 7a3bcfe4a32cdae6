#pragma once

#include "cutagg/grid.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cutagg {

enum class Schedule
{
  Sequential,
  Shuffled, ///< rank order permuted every round from a seeded generator
  Threaded  ///< one worker thread per rank per round
};

struct ScheduleOptions
{
  Schedule kind = Schedule::Sequential;
  std::uint64_t seed = 0;
};

/// Thrown when a message references a cell the sender or receiver cannot see.
class LocalityViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Thrown when a fixpoint loop observes its progress measure decrease.
class MonotonicityViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

template <class T>
struct Envelope
{
  int from = 0;
  T payload;
};

template <class T>
class Outbox
{
public:
  struct Item
  {
    int to;
    T payload;
    std::vector<CellIndex> refs;
  };

  void send(int to, T payload, std::vector<CellIndex> refs)
  {
    items_.push_back({to, std::move(payload), std::move(refs)});
  }
  std::vector<Item> &items() { return items_; }

private:
  std::vector<Item> items_;
};

/// Bulk-synchronous logical ranks over a static partition.
class RankNetwork
{
public:
  explicit RankNetwork(Partition partition, ScheduleOptions schedule = {});

  int rank_count() const { return partition_.rank_count(); }
  const Partition &partition() const { return partition_; }
  int rounds() const { return round_; }
  std::int64_t messages_sent() const { return messages_; }

  void set_trace(std::ostream *trace) { trace_ = trace; }

  /// Run `work` once per rank under the configured schedule.
  void for_each_rank(const std::function<void(int)> &work);

  /// One communication round: every rank fills its outbox, then mail is delivered.
  /// Delivery order per receiver is (sender rank, emission order), independent of schedule.
  template <class T>
  std::vector<std::vector<Envelope<T>>> exchange(std::string_view kind,
                                                 const std::function<void(int, Outbox<T> &)> &work)
  {
    const int R = rank_count();
    std::vector<Outbox<T>> out(R);
    for_each_rank([&](int r) { work(r, out[r]); });
    std::vector<std::vector<Envelope<T>>> inbox(R);
    for (int r = 0; r < R; ++r)
    {
      for (auto &item : out[r].items())
      {
        if (item.to < 0 || item.to >= R || item.to == r)
          throw LocalityViolation("message addressed to invalid rank");
        for (CellIndex c : item.refs)
          if (!partition_.is_visible(r, c) || !partition_.is_visible(item.to, c))
            throw LocalityViolation("message from rank " + std::to_string(r) + " to rank " +
                                    std::to_string(item.to) + " references cell " + std::to_string(c.value) +
                                    " outside their shared halo");
        inbox[item.to].push_back({r, std::move(item.payload)});
      }
      trace_round(r, kind, out[r].items().size());
      messages_ += static_cast<std::int64_t>(out[r].items().size());
    }
    ++round_;
    return inbox;
  }

  /// Collective: every rank contributes a value, every rank sees all values ordered by rank.
  template <class T>
  std::vector<T> all_gather(std::string_view kind, const std::function<T(int)> &contribute)
  {
    std::vector<T> values(rank_count());
    for_each_rank([&](int r) { values[r] = contribute(r); });
    for (int r = 0; r < rank_count(); ++r)
      trace_round(r, kind, rank_count() - 1);
    messages_ += static_cast<std::int64_t>(rank_count()) * (rank_count() - 1);
    ++round_;
    return values;
  }

private:
  void trace_round(int rank, std::string_view kind, std::size_t payload);

  Partition partition_;
  ScheduleOptions schedule_;
  std::mt19937_64 rng_;
  int round_ = 0;
  std::int64_t messages_ = 0;
  std::ostream *trace_ = nullptr;
};

/// Per-rank flag vectors indexed by global cell; each rank fills only owned entries.
/// Afterwards every rank also holds the owner's value for each of its ghosts.
void exchange_ghost_flags(RankNetwork &net, std::vector<std::vector<std::uint8_t>> &flags);

struct Candidate
{
  double fraction = 0.0;
  CellIndex cell;
};

/// Largest fraction, ties to the lowest index; nullopt when every rank is empty.
std::optional<CellIndex> global_agree_max(RankNetwork &net, const std::vector<std::optional<Candidate>> &per_rank);

/// Repeats `round_fn` until its monotone progress measure stops growing.
/// Returns the number of rounds executed (the last one made no progress).
int run_rounds_to_fixpoint(std::int64_t initial, const std::function<std::int64_t()> &round_fn,
                           int max_rounds = 1 << 20);

} // namespace cutagg
