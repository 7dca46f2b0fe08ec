#pragma once

// Statevector kernels for qubit registers. Qubit k is bit k of the amplitude index and
// the usual computational convention Z|0> = +|0> applies here (unlike the chain models).

#include <Eigen/Dense>

#include "scarlab/hilbert.hpp"

namespace scarlab::circuit {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Mat8 = Eigen::Matrix<Complex, 8, 8>;

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();

// exp(-i theta P / 2) for the named Pauli operator(s).
Mat2 rx(double theta);
Mat2 ry(double theta);
Mat2 rz(double theta);
Mat4 rxx(double theta);
Mat4 ryy(double theta);
Mat4 rzz(double theta);

// Two-qubit matrix acting as `a` on the first qubit and `b` on the second; the local
// index of a pair (q0, q1) is bit(q0) + 2 bit(q1).
Mat4 on_pair(const Mat2& a, const Mat2& b);

// Controlled-U with control = first qubit of the pair, target = second.
Mat4 controlled(const Mat2& u);

void apply_1q(Eigen::VectorXcd& psi, int q, const Mat2& u);
void apply_2q(Eigen::VectorXcd& psi, int q0, int q1, const Mat4& u);
// Local index bit(q0) + 2 bit(q1) + 4 bit(q2).
void apply_3q(Eigen::VectorXcd& psi, int q0, int q1, int q2, const Mat8& u);

// <lambda| (.) |phi> reduced onto a qubit pair: m(a, b) = sum_rest conj(lambda[a, rest]) phi[b, rest],
// so that <lambda|U|phi> = sum_ab U(a, b) m(a, b) for U acting on (q0, q1).
Mat4 pair_overlap(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& phi, int q0, int q1);
Mat2 site_overlap(const Eigen::VectorXcd& lambda, const Eigen::VectorXcd& phi, int q);

double probability_one(const Eigen::VectorXcd& psi, int q);

int qubit_count(const Eigen::VectorXcd& psi);

}  // namespace scarlab::circuit
