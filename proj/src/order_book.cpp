#include "calib/order_book.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>
#include <string>

namespace calib {

template <class Book>
Qty OrderBook::match_against(Book& book, const Order& incoming, Qty remaining,
                             std::vector<Trade>& out) {
  const bool is_buy = incoming.side == Side::bid;
  while (remaining > 0 && !book.empty()) {
    auto level = book.begin();
    if (incoming.kind == OrderKind::limit) {
      const Price limit = *incoming.price;
      if (is_buy ? level->first > limit : level->first < limit) break;
    }
    Queue& queue = level->second;
    while (remaining > 0 && !queue.empty()) {
      Resting& head = queue.front();
      const Qty fill = std::min(remaining, head.remaining);
      Trade t;
      t.time = incoming.timestamp;
      t.price = level->first;
      t.size = fill;
      t.buy_id = is_buy ? incoming.id : head.id;
      t.sell_id = is_buy ? head.id : incoming.id;
      t.aggressor = incoming.side;
      out.push_back(t);
      trades_.push_back(t);
      remaining -= fill;
      head.remaining -= fill;
      if (head.remaining == 0) {
        index_.erase(head.id);
        queue.pop_front();
      }
    }
    if (queue.empty()) book.erase(level);
  }
  return remaining;
}

std::vector<Trade> OrderBook::submit(const Order& order) {
  if (order.size <= 0) throw std::invalid_argument("order size must be positive");
  if (order.kind == OrderKind::limit && (!order.price || *order.price <= 0)) {
    throw std::invalid_argument("limit order requires a positive price");
  }
  if (last_id_ && order.id <= *last_id_) {
    throw std::invalid_argument("order id " + std::to_string(order.id) +
                                " is not strictly increasing");
  }
  last_id_ = order.id;

  std::vector<Trade> fills;
  Qty remaining = order.size;
  if (order.side == Side::bid) {
    remaining = match_against(asks_, order, remaining, fills);
  } else {
    remaining = match_against(bids_, order, remaining, fills);
  }

  if (remaining > 0 && order.kind == OrderKind::limit) {
    const Price p = *order.price;
    auto rest = [&](auto& book) {
      Queue& q = book[p];
      q.push_back(Resting{order.id, remaining, order.timestamp});
      index_.emplace(order.id, Locator{order.side, p, std::prev(q.end())});
    };
    if (order.side == Side::bid) {
      rest(bids_);
    } else {
      rest(asks_);
    }
  }
  return fills;
}

bool OrderBook::cancel(OrderId id) {
  auto found = index_.find(id);
  if (found == index_.end()) return false;
  const Locator loc = found->second;
  index_.erase(found);
  auto drop = [&](auto& book) {
    auto level = book.find(loc.price);
    level->second.erase(loc.it);
    if (level->second.empty()) book.erase(level);
  };
  if (loc.side == Side::bid) {
    drop(bids_);
  } else {
    drop(asks_);
  }
  return true;
}

std::optional<Price> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Price> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

std::optional<double> OrderBook::mid() const {
  if (bids_.empty() || asks_.empty()) return std::nullopt;
  return 0.5 * static_cast<double>(bids_.begin()->first + asks_.begin()->first);
}

Qty OrderBook::depth_at(Side side, Price price) const {
  auto sum = [&](const auto& book) -> Qty {
    auto level = book.find(price);
    if (level == book.end()) return 0;
    Qty total = 0;
    for (const auto& r : level->second) total += r.remaining;
    return total;
  };
  return side == Side::bid ? sum(bids_) : sum(asks_);
}

std::vector<LevelView> OrderBook::levels(Side side) const {
  std::vector<LevelView> out;
  auto collect = [&](const auto& book) {
    for (const auto& [price, queue] : book) {
      LevelView v{price, 0, queue.size()};
      for (const auto& r : queue) v.total += r.remaining;
      out.push_back(v);
    }
  };
  if (side == Side::bid) {
    collect(bids_);
  } else {
    collect(asks_);
  }
  return out;
}

}  // namespace calib
