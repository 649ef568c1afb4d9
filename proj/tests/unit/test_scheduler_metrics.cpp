#include <gtest/gtest.h>

#include "agentosi/error.hpp"
#include "agentosi/metrics.hpp"
#include "agentosi/scheduler.hpp"

using namespace agentosi;

TEST(Scheduler, OrdersByTimeThenInsertion) {
  Scheduler s;
  std::vector<int> order;
  s.at(10, [&] { order.push_back(2); });
  s.at(5, [&] { order.push_back(1); });
  s.at(10, [&] { order.push_back(3); });
  s.run();
  EXPECT_EQ(order, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(s.now(), 10);
  EXPECT_EQ(s.executed(), 3u);
}

TEST(Scheduler, NestedSchedulingAndRunUntil) {
  Scheduler s;
  int fired = 0;
  s.at(0, [&] {
    ++fired;
    s.after(100, [&] { ++fired; });
  });
  s.run_until(50);
  EXPECT_EQ(fired, 1);
  EXPECT_EQ(s.now(), 50);
  EXPECT_EQ(s.pending(), 1u);
  s.run();
  EXPECT_EQ(fired, 2);
  EXPECT_TRUE(s.idle());
}

TEST(Scheduler, RejectsPast) {
  Scheduler s;
  s.run_until(100);
  EXPECT_THROW(s.at(99, [] {}), Error);
}

TEST(Percentile, NearestRank) {
  const std::vector<double> xs{15, 20, 35, 40, 50};
  EXPECT_EQ(percentile(xs, 5), 15);
  EXPECT_EQ(percentile(xs, 30), 20);
  EXPECT_EQ(percentile(xs, 40), 20);
  EXPECT_EQ(percentile(xs, 50), 35);
  EXPECT_EQ(percentile(xs, 100), 50);
  EXPECT_EQ(percentile(xs, 0), 15);
  EXPECT_THROW(percentile({}, 50), Error);
}

TEST(Summary, Fields) {
  std::vector<double> xs;
  for (int i = 1; i <= 10; ++i) xs.push_back(i);
  const auto s = summarize(xs);
  EXPECT_EQ(s.n, 10u);
  EXPECT_EQ(s.median, 5);
  EXPECT_EQ(s.p10, 1);
  EXPECT_EQ(s.p90, 9);
  EXPECT_DOUBLE_EQ(s.mean, 5.5);
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 10);
  EXPECT_EQ(summarize({}).n, 0u);
}
