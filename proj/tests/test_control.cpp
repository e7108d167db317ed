#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "swarmnet/control.hpp"
#include "swarmnet/errors.hpp"
#include "swarmnet/rng.hpp"

using namespace swarmnet;

namespace {

// Central-difference gradient of a scalar field, the independent oracle for
// both analytic gradients.
Vec2 fd_gradient(const std::function<double(Vec2)>& f, Vec2 x, double h) {
    return {(f({x.x + h, x.y}) - f({x.x - h, x.y})) / (2.0 * h),
            (f({x.x, x.y + h}) - f({x.x, x.y - h})) / (2.0 * h)};
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = f(mid);
        if ((flo < 0.0) == (fmid < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Scalar radial slope of the softened pair potential; its root is the
// equilibrium distance d*.
double softened_bracket(double d, double rc, double rf) {
    const auto [k_col, k_conn] = potential_constants(rc, rf);
    return -(2.0 * k_col / (rc * rc)) * std::exp(-d * d / (rc * rc)) +
           (2.0 * k_conn / (rf * rf)) * std::exp(d * d / (rf * rf));
}

}  // namespace

TEST_CASE("potential constants from the stated radii") {
    const auto [k_col, k_conn] = potential_constants(0.8, 10.0);
    CHECK(k_col == doctest::Approx(10.64));
    CHECK(k_conn == doctest::Approx(10.0));
}

TEST_CASE("softened gradient matches central finite differences") {
    RngStream rng(101);
    const double rc = 0.8, rf = 10.0;
    int checked = 0;
    while (checked < 1000) {
        const Vec2 xj{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
        const double d = rng.uniform(0.3, 2.0 * rf);
        const double theta = rng.uniform(0.0, 6.283185307179586);
        const Vec2 xi = xj + Vec2{d * std::cos(theta), d * std::sin(theta)};
        const Vec2 analytic = potential_gradient(xi, xj, rc, rf);
        const Vec2 numeric =
            fd_gradient([&](Vec2 p) { return potential_value(p, xj, rc, rf); }, xi, 1e-6 * d);
        const double scale = std::max(norm(analytic), 1e-12);
        CHECK(norm(analytic - numeric) / scale < 1e-6);
        ++checked;
    }
}

TEST_CASE("original gradient matches central finite differences below the radius") {
    RngStream rng(202);
    const double rf = 10.0;
    int checked = 0;
    while (checked < 1000) {
        const Vec2 xj{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
        const double d = rng.uniform(0.3, 0.95 * rf);
        const double theta = rng.uniform(0.0, 6.283185307179586);
        const Vec2 xi = xj + Vec2{d * std::cos(theta), d * std::sin(theta)};
        const Vec2 analytic = original_potential_gradient(xi, xj, rf);
        const Vec2 numeric = fd_gradient(
            [&](Vec2 p) { return original_potential_value(p, xj, rf); }, xi, 1e-7 * d);
        const double scale = std::max(norm(analytic), 1e-12);
        CHECK(norm(analytic - numeric) / scale < 1e-6);
        ++checked;
    }
}

TEST_CASE("interaction is antisymmetric") {
    RngStream rng(303);
    for (int i = 0; i < 200; ++i) {
        const Vec2 xi{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const Vec2 xj{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const Vec2 gij = potential_gradient(xi, xj, 0.8, 10.0);
        const Vec2 gji = potential_gradient(xj, xi, 0.8, 10.0);
        CHECK(gij.x == -gji.x);  // exact: same arithmetic on negated deltas
        CHECK(gij.y == -gji.y);
    }
}

TEST_CASE("gradient is rotation-equivariant") {
    RngStream rng(404);
    for (int i = 0; i < 100; ++i) {
        const Vec2 xi{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
        const Vec2 xj{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
        const double angle = rng.uniform(0.0, 6.283185307179586);
        const Vec2 rotated_grad = rotated(potential_gradient(xi, xj, 0.8, 10.0), angle);
        const Vec2 grad_of_rotated =
            potential_gradient(rotated(xi, angle), rotated(xj, angle), 0.8, 10.0);
        CHECK(norm(rotated_grad - grad_of_rotated) < 1e-9 * std::max(1.0, norm(rotated_grad)));
    }
}

TEST_CASE("softened gradient is finite everywhere including the flocking radius") {
    for (double d : {1e-6, 0.1, 0.8, 5.0, 10.0, 10.0 + 1e-9, 25.0, 80.0, 1000.0}) {
        const Vec2 g = potential_gradient({d, 0}, {0, 0}, 0.8, 10.0);
        CHECK(std::isfinite(g.x));
        CHECK(std::isfinite(g.y));
    }
    CHECK(potential_gradient({3, 4}, {3, 4}, 0.8, 10.0) == Vec2{});  // coincident tie-break
}

TEST_CASE("equilibrium distance: repulsion inside, attraction outside") {
    const double rc = 0.8, rf = 10.0;
    const double d_star = bisect([&](double d) { return softened_bracket(d, rc, rf); }, 0.8, 5.0);
    CHECK(d_star == doctest::Approx(1.8032813545268191).epsilon(1e-9));

    const double eps = 1e-3;
    const Vec2 inside = potential_gradient({d_star - eps, 0}, {0, 0}, rc, rf);
    const Vec2 outside = potential_gradient({d_star + eps, 0}, {0, 0}, rc, rf);
    // -grad is the commanded force: inside pushes away from j, outside pulls in.
    CHECK(-inside.x > 0.0);
    CHECK(-outside.x < 0.0);
}

TEST_CASE("original potential diverges at the flocking radius, softened does not") {
    const double rf = 10.0;
    const Vec2 near_singular = original_potential_gradient({rf - 1e-6, 0}, {0, 0}, rf);
    CHECK(norm(near_singular) > 1e6);
    CHECK(std::isfinite(norm(potential_gradient({rf, 0}, {0, 0}, 0.8, rf))));
    CHECK_THROWS_AS((void)original_potential_gradient({rf, 0}, {0, 0}, rf),
                    SingularPotentialError);
    CHECK_THROWS_AS((void)original_potential_gradient({rf + 1.0, 0}, {0, 0}, rf),
                    SingularPotentialError);
}

TEST_CASE("original potential has its minimum at r_flock/sqrt(2)") {
    const double rf = 10.0;
    // Root of the radial slope, found by bisection, not assumed.
    const double d_min = bisect(
        [&](double d) {
            const Vec2 g = original_potential_gradient({d, 0}, {0, 0}, rf);
            return g.x;
        },
        1.0, 9.0);
    CHECK(d_min == doctest::Approx(7.071067811865475).epsilon(1e-9));
    CHECK(norm(original_potential_gradient({d_min, 0}, {0, 0}, rf)) < 1e-9);
}

TEST_CASE("original potential is dominated by repulsion at small separations") {
    const Vec2 g = original_potential_gradient({0.1, 0}, {0, 0}, 10.0);
    CHECK(-g.x > 0.0);  // force on i points away from j
}

namespace {

FlockParams default_params() {
    FlockParams p;
    p.leader_speed = 30.0;
    p.leader_direction = {1.0, 0.0};
    return p;
}

}  // namespace

TEST_CASE("leader command is the set-point velocity regardless of belief") {
    AgentState leader{0, {0, 0}, {0, 0}, Role::leader};
    BeliefState belief = make_belief(0, 4);
    const Vec2 u = flock_control(belief, leader, default_params(), 4, 100, 30);
    CHECK(u == Vec2{30.0, 0.0});
}

TEST_CASE("follower with empty belief holds position") {
    AgentState follower{1, {5, 0}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(1, 4);
    CHECK(flock_control(belief, follower, default_params(), 4, 100, 30) == Vec2{});
}

TEST_CASE("two followers at the equilibrium distance command zero") {
    const double d_star =
        bisect([&](double d) { return softened_bracket(d, 0.8, 10.0); }, 0.8, 5.0);
    AgentState a{1, {0, 0}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(1, 3);
    update_belief(belief, Packet{2, {d_star, 0}, {0, 0}, 10}, 10);
    const Vec2 u = flock_control(belief, a, default_params(), 3, 12, 50);
    CHECK(norm(u) < 1e-9);
}

TEST_CASE("leader summand carries the n/10 weight") {
    FlockParams p = default_params();
    AgentState follower{1, {6, 0}, {0, 0}, Role::follower};

    BeliefState with_leader = make_belief(1, 40);
    update_belief(with_leader, Packet{0, {0, 0}, {30, 0}, 5}, 5);
    BeliefState with_peer = make_belief(1, 40);
    update_belief(with_peer, Packet{2, {0, 0}, {30, 0}, 5}, 5);

    const Vec2 u_leader = flock_control(with_leader, follower, p, 40, 6, 50);
    const Vec2 u_peer = flock_control(with_peer, follower, p, 40, 6, 50);
    CHECK(u_peer.x != 0.0);
    CHECK(u_leader.x == doctest::Approx(4.0 * u_peer.x).epsilon(1e-12));  // max(1, 40/10)

    CHECK(resolved_leader_weight(p, 5) == 1.0);
    CHECK(resolved_leader_weight(p, 10) == 1.0);
    CHECK(resolved_leader_weight(p, 25) == doctest::Approx(2.5));
    p.leader_weight = 7.0;  // explicit override wins
    CHECK(resolved_leader_weight(p, 25) == 7.0);
}

TEST_CASE("emergent control at consensus is a fixed point") {
    const double d_star =
        bisect([&](double d) { return softened_bracket(d, 0.8, 10.0); }, 0.8, 5.0);
    AgentState self{1, {0, 0}, {2, 1}, Role::follower};
    BeliefState belief = make_belief(1, 3);
    update_belief(belief, Packet{2, {d_star, 0}, {2, 1}, 3}, 3);
    const Vec2 u = emergent_flock_control(belief, self, default_params(), 10, 50);
    CHECK(norm(u) < 1e-9);
}

TEST_CASE("emergent control aligns to a neighbor's velocity at d*") {
    const double d_star =
        bisect([&](double d) { return softened_bracket(d, 0.8, 10.0); }, 0.8, 5.0);
    AgentState self{1, {0, 0}, {2, 0}, Role::follower};
    BeliefState belief = make_belief(1, 3);
    update_belief(belief, Packet{2, {d_star, 0}, {5, 0}, 3}, 3);
    const Vec2 u = emergent_flock_control(belief, self, default_params(), 10, 50);
    CHECK(u.x == doctest::Approx(3.0).epsilon(1e-9));  // -(v_self - v_j)
    CHECK(u.y == doctest::Approx(0.0));
}

TEST_CASE("emergent control with the singular potential flags out-of-range pairs") {
    FlockParams p = default_params();
    p.potential = PotentialKind::singular;
    AgentState self{1, {0, 0}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(1, 3);
    update_belief(belief, Packet{2, {15, 0}, {0, 0}, 3}, 3);  // beyond r_flock
    ControlDiagnostics diag;
    (void)emergent_flock_control(belief, self, p, 10, 50, &diag);
    CHECK(diag.singularity_hit);
}

TEST_CASE("update_belief records packets and overwrites on newer ones") {
    BeliefState belief = make_belief(0, 3);
    CHECK(belief.neighbors[1].last_heard_asn == -1);
    update_belief(belief, Packet{1, {1, 2}, {3, 4}, 7}, 7);
    CHECK(belief.neighbors[1].last_heard_asn == 7);
    CHECK(belief.neighbors[1].position == Vec2{1, 2});
    update_belief(belief, Packet{1, {9, 9}, {0, 0}, 12}, 12);
    CHECK(belief.neighbors[1].last_heard_asn == 12);
    CHECK(belief.neighbors[1].position == Vec2{9, 9});
}

TEST_CASE("leader packets set the believed leader velocity") {
    BeliefState belief = make_belief(2, 3);
    CHECK_FALSE(belief.leader_velocity.has_value());
    update_belief(belief, Packet{0, {0, 0}, {30, 0}, 4}, 4);
    REQUIRE(belief.leader_velocity.has_value());
    CHECK(*belief.leader_velocity == Vec2{30.0, 0.0});
    CHECK(belief.leader_last_heard_asn == 4);
}

TEST_CASE("controllers ignore future-stamped packets") {
    AgentState self{1, {0, 0}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(1, 3);
    update_belief(belief, Packet{2, {3, 0}, {0, 0}, 50}, 50);  // arrives "later"
    // Control evaluated at asn 10 must not see a packet stamped 50.
    CHECK(flock_control(belief, self, default_params(), 3, 10, 100) == Vec2{});
    // Once time catches up the entry is usable.
    CHECK(flock_control(belief, self, default_params(), 3, 60, 100) != Vec2{});
}

TEST_CASE("belief pruning drops entries older than the staleness window") {
    BeliefState belief = make_belief(0, 4);
    update_belief(belief, Packet{1, {1, 0}, {0, 0}, 10}, 10);
    update_belief(belief, Packet{2, {2, 0}, {0, 0}, 95}, 95);
    prune_beliefs(belief, 100, 30);
    CHECK(belief.neighbors[1].last_heard_asn == -1);  // 90 slots old, dropped
    CHECK(belief.neighbors[2].last_heard_asn == 95);  // inside the window
}

TEST_CASE("freshness window boundary keeps exactly stale_window-old entries") {
    BeliefEntry e;
    e.last_heard_asn = 70;
    CHECK(belief_entry_fresh(e, 100, 30));
    CHECK_FALSE(belief_entry_fresh(e, 101, 30));
}

TEST_CASE("local_line_fit on exact lines") {
    SUBCASE("diagonal") {
        const std::vector<Vec2> pts = {{0, 0}, {1, 1}, {2, 2}};
        const LineFit fit = local_line_fit(pts);
        CHECK(std::abs(fit.direction.x) == doctest::Approx(std::abs(fit.direction.y)));
        for (const Vec2& p : pts) CHECK(point_line_distance(p, fit) < 1e-12);
    }
    SUBCASE("vertical is well-defined under orthogonal regression") {
        const std::vector<Vec2> pts = {{0, 0}, {0, 1}, {0, 2}};
        const LineFit fit = local_line_fit(pts);
        CHECK(std::abs(fit.direction.y) == doctest::Approx(1.0));
        CHECK(std::abs(fit.direction.x) == doctest::Approx(0.0));
    }
    SUBCASE("single point falls back to the horizontal line") {
        const std::vector<Vec2> pts = {{3, 4}};
        const LineFit fit = local_line_fit(pts);
        CHECK(fit.point == Vec2{3, 4});
        CHECK(fit.direction == Vec2{1.0, 0.0});
    }
    SUBCASE("two points define the join") {
        const std::vector<Vec2> pts = {{0, 0}, {2, 1}};
        const LineFit fit = local_line_fit(pts);
        CHECK(point_line_distance({0, 0}, fit) < 1e-12);
        CHECK(point_line_distance({2, 1}, fit) < 1e-12);
    }
    SUBCASE("coincident points tie-break horizontally") {
        const std::vector<Vec2> pts = {{1, 1}, {1, 1}, {1, 1}};
        const LineFit fit = local_line_fit(pts);
        CHECK(fit.direction == Vec2{1.0, 0.0});
        CHECK(fit.point == Vec2{1, 1});
    }
}

TEST_CASE("local_line_fit centroid and direction, hand-computed eigen case") {
    const std::vector<Vec2> pts = {{0, 0}, {1, 1}, {2, 0}};
    const LineFit fit = local_line_fit(pts);
    CHECK(fit.point.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.point.y == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(fit.direction.x) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(fit.direction.y) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("formation control projects toward the local consensus line") {
    FormationParams params;
    AgentState self{0, {0, 1}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(0, 3);
    update_belief(belief, Packet{1, {-1, 0}, {0, 0}, 2}, 2);
    update_belief(belief, Packet{2, {1, 0}, {0, 0}, 2}, 2);
    const Vec2 u = formation_control(belief, self, params, 5, 50);
    // Centroid (0, 1/3), horizontal direction: the target is (0, 1/3).
    CHECK(u.x == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(u.y == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("formation control is zero on its own line or with no neighbors") {
    FormationParams params;
    AgentState self{0, {4, 2}, {0, 0}, Role::follower};
    BeliefState empty = make_belief(0, 3);
    CHECK(formation_control(empty, self, params, 5, 50) == Vec2{});

    BeliefState collinear = make_belief(0, 3);
    update_belief(collinear, Packet{1, {0, 0}, {0, 0}, 2}, 2);
    update_belief(collinear, Packet{2, {8, 4}, {0, 0}, 2}, 2);
    CHECK(formation_control(collinear, self, params, 5, 50) == Vec2{});
}

TEST_CASE("formation control stops inside the epsilon band") {
    FormationParams params;
    params.stop_epsilon = 0.01;
    AgentState self{0, {0, 0.005}, {0, 0}, Role::follower};
    BeliefState belief = make_belief(0, 3);
    update_belief(belief, Packet{1, {-1, 0}, {0, 0}, 2}, 2);
    update_belief(belief, Packet{2, {1, 0}, {0, 0}, 2}, 2);
    const Vec2 u = formation_control(belief, self, params, 5, 50);
    CHECK(u == Vec2{});
}
