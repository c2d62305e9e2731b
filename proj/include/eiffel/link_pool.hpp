#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "eiffel/errors.hpp"

namespace eiffel {

using Rank = std::uint64_t;
using NodeId = std::uint32_t;
inline constexpr NodeId kNil = std::numeric_limits<NodeId>::max();

// Stable reference to an element inside a bucketed queue. Stays valid while
// the element is queued, including when the element moves between buckets.
struct Handle {
  NodeId slot = kNil;
  std::uint32_t generation = 0;

  [[nodiscard]] bool valid() const noexcept { return slot != kNil; }
  friend auto operator<=>(const Handle&, const Handle&) = default;
};

struct Link {
  NodeId prev = kNil;
  NodeId next = kNil;
  std::uint32_t bucket = 0;
  std::uint32_t generation = 0;
  Rank rank = 0;
  std::uint8_t window = 0;
  bool live = false;
};

struct BucketList {
  NodeId head = kNil;
  NodeId tail = kNil;

  [[nodiscard]] bool empty() const noexcept { return head == kNil; }
};

// Slab of doubly linked list nodes shared by every bucket of a queue.
// Payloads live beside it in the owning queue, indexed by NodeId.
class LinkPool {
 public:
  NodeId acquire(Rank rank) {
    NodeId id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<NodeId>(links_.size());
      links_.emplace_back();
    }
    Link& l = links_[id];
    l.prev = l.next = kNil;
    l.rank = rank;
    l.live = true;
    return id;
  }

  void release(NodeId id) {
    Link& l = links_[id];
    l.live = false;
    ++l.generation;
    free_.push_back(id);
  }

  [[nodiscard]] Link& operator[](NodeId id) noexcept { return links_[id]; }
  [[nodiscard]] const Link& operator[](NodeId id) const noexcept { return links_[id]; }

  [[nodiscard]] Handle handle_of(NodeId id) const noexcept {
    return Handle{id, links_[id].generation};
  }

  [[nodiscard]] NodeId resolve(Handle h) const {
    if (h.slot >= links_.size() || !links_[h.slot].live ||
        links_[h.slot].generation != h.generation) {
      throw InvalidHandle("stale or foreign queue handle");
    }
    return h.slot;
  }

  [[nodiscard]] std::size_t slots() const noexcept { return links_.size(); }

  void append(BucketList& list, NodeId id) noexcept {
    Link& l = links_[id];
    l.next = kNil;
    l.prev = list.tail;
    if (list.tail == kNil) {
      list.head = id;
    } else {
      links_[list.tail].next = id;
    }
    list.tail = id;
  }

  void unlink(BucketList& list, NodeId id) noexcept {
    Link& l = links_[id];
    if (l.prev == kNil) {
      list.head = l.next;
    } else {
      links_[l.prev].next = l.next;
    }
    if (l.next == kNil) {
      list.tail = l.prev;
    } else {
      links_[l.next].prev = l.prev;
    }
    l.prev = l.next = kNil;
  }

  NodeId pop_front(BucketList& list) noexcept {
    NodeId id = list.head;
    unlink(list, id);
    return id;
  }

 private:
  std::vector<Link> links_;
  std::vector<NodeId> free_;
};

}  // namespace eiffel
