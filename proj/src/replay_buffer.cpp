#include "reachavoid/replay_buffer.hpp"

#include "reachavoid/error.hpp"

namespace reachavoid {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw DomainError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (t.state.size() != t.next_state.size()) {
        throw ShapeError("transition state/next_state lengths differ");
    }
    if (store_.size() < capacity_) {
        store_.push_back(std::move(t));
    } else {
        store_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch,
                                                      Rng& rng) const {
    if (store_.empty()) throw StateError("sampling from an empty buffer");
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = rng.index(store_.size());
    return idx;
}

}  // namespace reachavoid
