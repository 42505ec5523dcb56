#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

namespace calib {

using Price = std::int64_t;    // integer cents
using Qty = std::int64_t;      // shares
using SimTime = std::int64_t;  // nanoseconds since midnight
using OrderId = std::uint64_t;

enum class Side : std::uint8_t { bid, ask };
enum class OrderKind : std::uint8_t { limit, market };

constexpr Side opposite(Side s) noexcept { return s == Side::bid ? Side::ask : Side::bid; }

struct Order {
  OrderId id = 0;
  Side side = Side::bid;
  OrderKind kind = OrderKind::limit;
  std::optional<Price> price;  // absent for market orders
  Qty size = 0;
  SimTime timestamp = 0;
  std::int32_t agent_id = -1;
};

struct Trade {
  SimTime time = 0;
  Price price = 0;
  Qty size = 0;
  OrderId buy_id = 0;
  OrderId sell_id = 0;
  Side aggressor = Side::bid;

  friend bool operator==(const Trade&, const Trade&) = default;
};

struct LevelView {
  Price price = 0;
  Qty total = 0;
  std::size_t orders = 0;
};

// Continuous double auction with price-time priority. Market orders walk the
// opposite side until filled or the side empties; any residual is dropped.
// Limit orders match whatever crosses and rest the remainder.
class OrderBook {
 public:
  // Throws std::invalid_argument for size <= 0, a limit order without a
  // positive price, or an id not strictly greater than the previous one.
  std::vector<Trade> submit(const Order& order);

  // Removes a resting order. Returns false when it is no longer resting.
  bool cancel(OrderId id);

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;
  std::optional<double> mid() const;

  Qty depth_at(Side side, Price price) const;
  std::size_t resting_orders() const noexcept { return index_.size(); }
  std::vector<LevelView> levels(Side side) const;

  const std::vector<Trade>& trade_log() const noexcept { return trades_; }

 private:
  struct Resting {
    OrderId id;
    Qty remaining;
    SimTime timestamp;
  };
  using Queue = std::list<Resting>;
  struct Locator {
    Side side;
    Price price;
    Queue::iterator it;
  };

  template <class Book>
  Qty match_against(Book& book, const Order& incoming, Qty remaining, std::vector<Trade>& out);

  std::map<Price, Queue, std::greater<>> bids_;
  std::map<Price, Queue, std::less<>> asks_;
  std::unordered_map<OrderId, Locator> index_;
  std::vector<Trade> trades_;
  std::optional<OrderId> last_id_;
};

}  // namespace calib
