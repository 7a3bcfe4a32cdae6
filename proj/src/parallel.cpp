#include "cutagg/parallel.hpp"

#include <nlohmann/json.hpp>

#include <numeric>

namespace cutagg {

RankNetwork::RankNetwork(Partition partition, ScheduleOptions schedule)
  : partition_(std::move(partition)), schedule_(schedule), rng_(schedule.seed)
{
}

void
RankNetwork::for_each_rank(const std::function<void(int)> &work)
{
  const int R = rank_count();
  switch (schedule_.kind)
  {
  case Schedule::Sequential:
    for (int r = 0; r < R; ++r)
      work(r);
    break;
  case Schedule::Shuffled: {
    std::vector<int> order(R);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);
    for (int r : order)
      work(r);
    break;
  }
  case Schedule::Threaded: {
    std::vector<std::exception_ptr> errors(R);
    std::vector<std::thread> workers;
    workers.reserve(R);
    for (int r = 0; r < R; ++r)
      workers.emplace_back([&, r] {
        try
        {
          work(r);
        }
        catch (...)
        {
          errors[r] = std::current_exception();
        }
      });
    for (auto &w : workers)
      w.join();
    for (auto &e : errors)
      if (e)
        std::rethrow_exception(e);
    break;
  }
  }
}

void
RankNetwork::trace_round(int rank, std::string_view kind, std::size_t payload)
{
  if (!trace_)
    return;
  nlohmann::ordered_json j{{"rank", rank}, {"round", round_}, {"kind", std::string(kind)}, {"payload", payload}};
  *trace_ << j.dump() << '\n';
}

void
exchange_ghost_flags(RankNetwork &net, std::vector<std::vector<std::uint8_t>> &flags)
{
  const Partition &part = net.partition();
  if (static_cast<int>(flags.size()) != net.rank_count())
    throw std::invalid_argument("exchange_ghost_flags: one flag vector per rank required");
  if (net.rank_count() == 1)
    return;

  struct FlagMsg
  {
    CellIndex cell;
    std::uint8_t flag;
  };
  auto inbox = net.exchange<FlagMsg>("ghost-flags", [&](int r, Outbox<FlagMsg> &out) {
    for (CellIndex c : part.owned(r))
      for (int h : part.ghost_holders(c))
        out.send(h, {c, flags[r][c.value]}, {c});
  });
  for (int r = 0; r < net.rank_count(); ++r)
    for (const auto &env : inbox[r])
      flags[r][env.payload.cell.value] = env.payload.flag;
}

std::optional<CellIndex>
global_agree_max(RankNetwork &net, const std::vector<std::optional<Candidate>> &per_rank)
{
  if (static_cast<int>(per_rank.size()) != net.rank_count())
    throw std::invalid_argument("global_agree_max: one entry per rank required");
  auto all = net.all_gather<std::optional<Candidate>>("agree-max", [&](int r) { return per_rank[r]; });

  auto better = [](const Candidate &a, const Candidate &b) {
    return a.fraction > b.fraction || (a.fraction == b.fraction && a.cell < b.cell);
  };
  // every rank reduces the gathered list itself; the results must coincide
  std::vector<std::optional<CellIndex>> decided(net.rank_count());
  net.for_each_rank([&](int r) {
    std::optional<Candidate> best;
    for (int k = 0; k < net.rank_count(); ++k)
    {
      const int src = (r + k) % net.rank_count();
      if (all[src] && (!best || better(*all[src], *best)))
        best = all[src];
    }
    if (best)
      decided[r] = best->cell;
  });
  for (const auto &d : decided)
    if (d != decided.front())
      throw std::logic_error("ranks disagree on the global maximum");
  return decided.front();
}

int
run_rounds_to_fixpoint(std::int64_t initial, const std::function<std::int64_t()> &round_fn, int max_rounds)
{
  std::int64_t prev = initial;
  for (int rounds = 1; rounds <= max_rounds; ++rounds)
  {
    const std::int64_t now = round_fn();
    if (now < prev)
      throw MonotonicityViolation("progress measure decreased from " + std::to_string(prev) + " to " +
                                  std::to_string(now));
    if (now == prev)
      return rounds;
    prev = now;
  }
  throw std::runtime_error("fixpoint not reached within " + std::to_string(max_rounds) + " rounds");
}

} // namespace cutagg
