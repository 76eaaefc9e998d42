#include "om/oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace om {

std::ptrdiff_t OracleList::position(Id id) const {
    const auto it = std::find(sequence_.begin(), sequence_.end(), id);
    return it == sequence_.end() ? -1 : it - sequence_.begin();
}

void OracleList::push_back(Id id) {
    if (!members_.insert(id).second) throw std::logic_error("oracle: duplicate id");
    sequence_.push_back(id);
}

void OracleList::insert(Id x, Id y) {
    if (!members_.contains(x)) throw std::logic_error("oracle: insert after an absent item");
    if (members_.contains(y)) throw std::logic_error("oracle: inserted item already present");
    const auto pos = position(x);
    sequence_.insert(sequence_.begin() + pos + 1, y);
    members_.insert(y);
}

void OracleList::insert_front(Id y) {
    if (!members_.insert(y).second) throw std::logic_error("oracle: inserted item already present");
    sequence_.insert(sequence_.begin(), y);
}

bool OracleList::remove(Id x) {
    if (members_.erase(x) == 0) return false;
    sequence_.erase(sequence_.begin() + position(x));
    return true;
}

OrderResult OracleList::order(Id x, Id y) const {
    if (!members_.contains(x) || !members_.contains(y)) return OrderResult::Fail;
    return position(x) < position(y) ? OrderResult::Before : OrderResult::NotBefore;
}

bool OracleList::consistent() const {
    if (members_.size() != sequence_.size()) return false;
    std::unordered_set<Id> seen;
    for (Id id : sequence_) {
        if (!members_.contains(id) || !seen.insert(id).second) return false;
    }
    return true;
}

}  // namespace om
