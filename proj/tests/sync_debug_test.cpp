// Compiled with assertions on regardless of build type, so the inline
// ownership check in NodeLock::unlock is active.
#undef NDEBUG

#include <gtest/gtest.h>

#include "om/sync.hpp"

namespace {

TEST(NodeLockDeathTest, ReleaseWithoutAcquireAborts) {
    om::NodeLock lock;
    EXPECT_DEATH(lock.unlock(om::LockKind::Spin), "not held");
    EXPECT_DEATH(lock.unlock(om::LockKind::Blocking), "not held");
}

}  // namespace
