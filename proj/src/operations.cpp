#include "distill/operations.hpp"

#include <algorithm>
#include <string>

#include "distill/errors.hpp"
#include "distill/kernels.hpp"

namespace distill {

namespace {

OperationClass maxClass(OperationClass a, OperationClass b) {
  return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

std::string labelText(BipartiteLabel l) {
  return std::to_string(l.dimA) + "x" + std::to_string(l.dimB);
}

// vec index of the partial transpose (on B) of the matrix unit at vec index v.
int ptVecIndex(BipartiteLabel label, int v) {
  const int d = label.total();
  const int r = v / d, c = v % d;
  const int rA = r / label.dimB, rB = r % label.dimB;
  const int cA = c / label.dimB, cB = c % label.dimB;
  return label.index(rA, cB) * d + label.index(cA, rB);
}

void requireSingleParty(const QuantumOperation& op, const char* what) {
  if (op.input().dimB != 1) throw LabelError(std::string(what) + ": expected a single-party operation");
  for (const auto& s : op.subops())
    if (s.output.dimB != 1) throw LabelError(std::string(what) + ": expected a single-party operation");
}

// Realignment R((ao,ai),(bo,bi)) = S((ao,bo),(ai,bi)); S = A⊗B iff rank R ≤ 1.
ComplexMatrix realign(const ComplexMatrix& s, BipartiteLabel out, BipartiteLabel in) {
  ComplexMatrix r(out.dimA * in.dimA, out.dimB * in.dimB);
  for (int ao = 0; ao < out.dimA; ++ao)
    for (int ai = 0; ai < in.dimA; ++ai)
      for (int bo = 0; bo < out.dimB; ++bo)
        for (int bi = 0; bi < in.dimB; ++bi)
          r(ao * in.dimA + ai, bo * in.dimB + bi) = s(out.index(ao, bo), in.index(ai, bi));
  return r;
}

}  // namespace

std::string_view toString(OperationClass c) noexcept {
  switch (c) {
    case OperationClass::Local: return "local";
    case OperationClass::OneLocal: return "1-local";
    case OperationClass::TwoLocal: return "2-local";
    case OperationClass::Separable: return "separable";
    case OperationClass::Ppt: return "ppt";
    case OperationClass::Unclassified: return "unclassified";
  }
  return "unclassified";
}

QuantumOperation::QuantumOperation(BipartiteLabel input, std::vector<SubOperation> subops,
                                   OperationClass provenance,
                                   std::optional<SeparableWitness> witness)
    : input_(input), subops_(std::move(subops)), provenance_(provenance),
      witness_(std::move(witness)) {
  if (input_.dimA < 1 || input_.dimB < 1) throw DimensionError("operation input label must be positive");
  if (subops_.empty()) throw DimensionError("operation needs at least one sub-operation");
  for (std::size_t i = 0; i < subops_.size(); ++i) {
    const auto& s = subops_[i];
    if (s.kraus.empty()) {
      throw DimensionError("sub-operation " + std::to_string(i) + " has no Kraus operators");
    }
    if (s.output.dimA < 1 || s.output.dimB < 1) throw DimensionError("output label must be positive");
    for (const auto& k : s.kraus) {
      if (k.cols() != input_.total() || k.rows() != s.output.total()) {
        throw DimensionError("sub-operation " + std::to_string(i) + ": Kraus operator is " +
                             std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                             ", expected " + std::to_string(s.output.total()) + "x" +
                             std::to_string(input_.total()));
      }
    }
  }
  if (witness_ && witness_->size() != subops_.size()) {
    throw DimensionError("witness does not cover every sub-operation");
  }
}

QuantumOperation identityOperation(BipartiteLabel label) {
  const int d = label.total();
  SeparableWitness w{{ProductTerm{ComplexMatrix::Identity(label.dimA, label.dimA),
                                  ComplexMatrix::Identity(label.dimB, label.dimB)}}};
  return QuantumOperation(label, {SubOperation{{ComplexMatrix::Identity(d, d)}, label}},
                          OperationClass::Local, std::move(w));
}

ComplexMatrix applyUnnormalized(const SubOperation& sub, const ComplexMatrix& rho) {
  return kernels::krausSum(sub.kraus, rho);
}

std::vector<Branch> apply(const QuantumOperation& op, const DensityOperator& rho) {
  if (rho.dim() != op.input().total()) {
    throw DimensionError("apply: state dimension " + std::to_string(rho.dim()) +
                         " does not match operation input " + labelText(op.input()));
  }
  if (rho.label() && *rho.label() != op.input()) {
    throw DimensionError("apply: state label " + labelText(*rho.label()) +
                         " does not match operation input " + labelText(op.input()));
  }
  std::vector<Branch> out;
  out.reserve(op.branchCount());
  for (const auto& sub : op.subops()) {
    ComplexMatrix m = applyUnnormalized(sub, rho.matrix());
    const double p = m.trace().real();
    if (p < kZeroProbability) {
      out.push_back(Branch{std::max(p, 0.0), std::nullopt});
      continue;
    }
    m /= p;
    m = (m + m.adjoint()) * 0.5;
    out.push_back(Branch{p, DensityOperator(std::move(m), sub.output)});
  }
  return out;
}

QuantumOperation compose(const QuantumOperation& first, const std::vector<QuantumOperation>& then) {
  if (then.size() != first.branchCount()) {
    throw DimensionError("compose: need one continuation per branch (" +
                         std::to_string(first.branchCount()) + "), got " +
                         std::to_string(then.size()));
  }
  std::vector<SubOperation> subops;
  OperationClass cls = first.provenance();
  bool haveWitness = first.witness().has_value();
  SeparableWitness witness;

  for (std::size_t i = 0; i < then.size(); ++i) {
    const auto& s = first.subop(i);
    const auto& t = then[i];
    if (t.input() != s.output) {
      throw DimensionError("compose: branch " + std::to_string(i) + " outputs " +
                           labelText(s.output) + " but continuation expects " +
                           labelText(t.input()));
    }
    cls = maxClass(cls, t.provenance());
    haveWitness = haveWitness && t.witness().has_value();
    for (std::size_t k = 0; k < t.branchCount(); ++k) {
      SubOperation combined{{}, t.subop(k).output};
      std::vector<ProductTerm> terms;
      for (std::size_t j = 0; j < s.kraus.size(); ++j)
        for (std::size_t l = 0; l < t.subop(k).kraus.size(); ++l) {
          combined.kraus.push_back(t.subop(k).kraus[l] * s.kraus[j]);
          if (haveWitness) {
            const auto& fs = (*first.witness())[i][j];
            const auto& ft = (*t.witness())[k][l];
            terms.push_back(ProductTerm{ft.a * fs.a, ft.b * fs.b});
          }
        }
      subops.push_back(std::move(combined));
      if (haveWitness) witness.push_back(std::move(terms));
    }
  }
  std::optional<SeparableWitness> w;
  if (haveWitness) w = std::move(witness);
  return QuantumOperation(first.input(), std::move(subops), cls, std::move(w));
}

QuantumOperation compose(const QuantumOperation& first, const QuantumOperation& then) {
  return compose(first, std::vector<QuantumOperation>(first.branchCount(), then));
}

QuantumOperation tensorOp(const QuantumOperation& s, const QuantumOperation& t) {
  const BipartiteLabel in = combine(s.input(), t.input());
  const bool haveWitness = s.witness().has_value() && t.witness().has_value();
  std::vector<SubOperation> subops;
  SeparableWitness witness;
  for (std::size_t i = 0; i < s.branchCount(); ++i)
    for (std::size_t j = 0; j < t.branchCount(); ++j) {
      const auto& si = s.subop(i);
      const auto& tj = t.subop(j);
      SubOperation combined{{}, combine(si.output, tj.output)};
      std::vector<ProductTerm> terms;
      for (std::size_t a = 0; a < si.kraus.size(); ++a)
        for (std::size_t b = 0; b < tj.kraus.size(); ++b) {
          combined.kraus.push_back(
              bipartiteTensor(si.kraus[a], si.output, s.input(), tj.kraus[b], tj.output, t.input()));
          if (haveWitness) {
            const auto& fs = (*s.witness())[i][a];
            const auto& ft = (*t.witness())[j][b];
            terms.push_back(ProductTerm{kernels::kron(fs.a, ft.a), kernels::kron(fs.b, ft.b)});
          }
        }
      subops.push_back(std::move(combined));
      if (haveWitness) witness.push_back(std::move(terms));
    }
  std::optional<SeparableWitness> w;
  if (haveWitness) w = std::move(witness);
  return QuantumOperation(in, std::move(subops), maxClass(s.provenance(), t.provenance()),
                          std::move(w));
}

QuantumOperation forget(const QuantumOperation& op, const std::set<std::size_t>& mergeSet) {
  if (mergeSet.empty()) return op;
  for (auto i : mergeSet)
    if (i >= op.branchCount()) throw DimensionError("forget: branch index " + std::to_string(i) + " out of range");
  const std::size_t anchor = *mergeSet.begin();
  const BipartiteLabel out = op.subop(anchor).output;
  for (auto i : mergeSet)
    if (op.subop(i).output != out) {
      throw DimensionError("forget: branches " + std::to_string(anchor) + " and " +
                           std::to_string(i) + " have different output spaces");
    }

  std::vector<SubOperation> subops;
  SeparableWitness witness;
  const bool haveWitness = op.witness().has_value();
  for (std::size_t i = 0; i < op.branchCount(); ++i) {
    if (i == anchor) {
      SubOperation merged{{}, out};
      std::vector<ProductTerm> terms;
      for (auto m : mergeSet) {
        const auto& k = op.subop(m).kraus;
        merged.kraus.insert(merged.kraus.end(), k.begin(), k.end());
        if (haveWitness) {
          const auto& wm = (*op.witness())[m];
          terms.insert(terms.end(), wm.begin(), wm.end());
        }
      }
      subops.push_back(std::move(merged));
      if (haveWitness) witness.push_back(std::move(terms));
    } else if (!mergeSet.contains(i)) {
      subops.push_back(op.subop(i));
      if (haveWitness) witness.push_back((*op.witness())[i]);
    }
  }
  std::optional<SeparableWitness> w;
  if (haveWitness) w = std::move(witness);
  return QuantumOperation(op.input(), std::move(subops), op.provenance(), std::move(w));
}

QuantumOperation forgetAll(const QuantumOperation& op) {
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < op.branchCount(); ++i) all.insert(i);
  return forget(op, all);
}

ComplexMatrix completenessSum(const QuantumOperation& op) {
  const int d = op.input().total();
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (const auto& s : op.subops())
    for (const auto& k : s.kraus) sum += k.adjoint() * k;
  return sum;
}

bool isTracePreserving(const QuantumOperation& op, double tolerance) {
  const int d = op.input().total();
  return maxAbsDifference(completenessSum(op), ComplexMatrix::Identity(d, d)) <= tolerance;
}

ComplexMatrix LinearAction::operator()(const ComplexMatrix& rho) const {
  const int din = input.total(), dout = output.total();
  if (rho.rows() != din || rho.cols() != din) throw DimensionError("LinearAction: input dimension mismatch");
  Eigen::VectorXcd v(din * din);
  for (int r = 0; r < din; ++r)
    for (int c = 0; c < din; ++c) v(r * din + c) = rho(r, c);
  const Eigen::VectorXcd w = superop * v;
  ComplexMatrix out(dout, dout);
  for (int r = 0; r < dout; ++r)
    for (int c = 0; c < dout; ++c) out(r, c) = w(r * dout + c);
  return out;
}

LinearAction actionOf(const SubOperation& sub, BipartiteLabel input) {
  return LinearAction{input, sub.output, kernels::superoperator(sub.kraus)};
}

ComplexMatrix choiMatrix(const LinearAction& action) {
  const int din = action.input.total(), dout = action.output.total();
  ComplexMatrix choi(din * dout, din * dout);
  for (int a = 0; a < din; ++a)
    for (int b = 0; b < din; ++b)
      for (int x = 0; x < dout; ++x)
        for (int y = 0; y < dout; ++y)
          choi(a * dout + x, b * dout + y) = action.superop(x * dout + y, a * din + b);
  return choi;
}

double choiMinEigenvalue(const LinearAction& action) { return minEigenvalue(choiMatrix(action)); }

bool isCompletelyPositive(const LinearAction& action, double tolerance) {
  return choiMinEigenvalue(action) >= -tolerance;
}

bool isCompletelyPositive(const SubOperation& sub, BipartiteLabel input, double tolerance) {
  return isCompletelyPositive(actionOf(sub, input), tolerance);
}

LinearAction pptTranspose(const LinearAction& action) {
  const int nin = action.input.total() * action.input.total();
  const int nout = action.output.total() * action.output.total();
  LinearAction out{action.input, action.output, ComplexMatrix(nout, nin)};
  for (int o = 0; o < nout; ++o) {
    const int po = ptVecIndex(action.output, o);
    for (int i = 0; i < nin; ++i) out.superop(o, i) = action.superop(po, ptVecIndex(action.input, i));
  }
  return out;
}

LinearAction pptTranspose(const SubOperation& sub, BipartiteLabel input) {
  return pptTranspose(actionOf(sub, input));
}

double pptChoiMinEigenvalue(const QuantumOperation& op) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& sub : op.subops())
    lo = std::min(lo, choiMinEigenvalue(pptTranspose(sub, op.input())));
  return lo;
}

bool isPptOperation(const QuantumOperation& op, double tolerance) {
  return pptChoiMinEigenvalue(op) >= -tolerance;
}

bool verifySeparableForm(const QuantumOperation& op, const SeparableWitness& w, double tolerance) {
  if (w.size() != op.branchCount()) {
    throw DimensionError("witness has " + std::to_string(w.size()) + " entries for " +
                         std::to_string(op.branchCount()) + " sub-operations");
  }
  const BipartiteLabel in = op.input();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const BipartiteLabel out = op.subop(i).output;
    if (w[i].empty()) throw DimensionError("witness entry " + std::to_string(i) + " is empty");
    std::vector<ComplexMatrix> induced;
    for (const auto& term : w[i]) {
      if (term.a.rows() != out.dimA || term.a.cols() != in.dimA || term.b.rows() != out.dimB ||
          term.b.cols() != in.dimB) {
        throw DimensionError("witness entry " + std::to_string(i) + " has the wrong factor shapes");
      }
      induced.push_back(kernels::kron(term.a, term.b));
    }
    // Equal superoperators means equal action on every matrix unit.
    const ComplexMatrix lhs = kernels::superoperator(op.subop(i).kraus);
    const ComplexMatrix rhs = kernels::superoperator(induced);
    if (maxAbsDifference(lhs, rhs) > tolerance) return false;
  }
  return true;
}

std::optional<SeparableWitness> factorProductKraus(const QuantumOperation& op, double tolerance) {
  SeparableWitness w;
  const BipartiteLabel in = op.input();
  for (const auto& sub : op.subops()) {
    std::vector<ProductTerm> terms;
    for (const auto& k : sub.kraus) {
      const ComplexMatrix r = realign(k, sub.output, in);
      Eigen::JacobiSVD<ComplexMatrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      ProductTerm term{ComplexMatrix::Zero(sub.output.dimA, in.dimA),
                       ComplexMatrix::Zero(sub.output.dimB, in.dimB)};
      if (sv.size() > 0 && sv(0) > tolerance) {
        for (Eigen::Index s = 1; s < sv.size(); ++s)
          if (sv(s) > tolerance * std::max(1.0, sv(0))) return std::nullopt;
        const double root = std::sqrt(sv(0));
        const ComplexVector u = svd.matrixU().col(0) * root;
        const ComplexVector v = svd.matrixV().col(0).conjugate() * root;
        for (int ao = 0; ao < sub.output.dimA; ++ao)
          for (int ai = 0; ai < in.dimA; ++ai) term.a(ao, ai) = u(ao * in.dimA + ai);
        for (int bo = 0; bo < sub.output.dimB; ++bo)
          for (int bi = 0; bi < in.dimB; ++bi) term.b(bo, bi) = v(bo * in.dimB + bi);
      }
      terms.push_back(std::move(term));
    }
    w.push_back(std::move(terms));
  }
  return w;
}

bool isVerifiablySeparable(const QuantumOperation& op) {
  if (op.witness() && verifySeparableForm(op, *op.witness())) return true;
  const auto auto_ = factorProductKraus(op);
  return auto_ && verifySeparableForm(op, *auto_);
}

QuantumOperation singleParty(int inputDim, std::vector<std::vector<ComplexMatrix>> krausPerBranch) {
  std::vector<SubOperation> subops;
  for (auto& k : krausPerBranch) {
    if (k.empty()) throw DimensionError("singleParty: empty Kraus list");
    const int out = static_cast<int>(k.front().rows());
    subops.push_back(SubOperation{std::move(k), BipartiteLabel{out, 1}});
  }
  const auto cls = subops.size() > 1 ? OperationClass::OneLocal : OperationClass::Local;
  return QuantumOperation(BipartiteLabel{inputDim, 1}, std::move(subops), cls);
}

QuantumOperation makeLocal(const QuantumOperation& sA, const QuantumOperation& sB) {
  requireSingleParty(sA, "makeLocal");
  requireSingleParty(sB, "makeLocal");
  if (sA.isMeasuring() || sB.isMeasuring()) {
    throw PreconditionError("makeLocal: both parts must be non-measuring");
  }
  const auto& a = sA.subop(0);
  const auto& b = sB.subop(0);
  SubOperation sub{{}, BipartiteLabel{a.output.dimA, b.output.dimA}};
  std::vector<ProductTerm> terms;
  for (const auto& ka : a.kraus)
    for (const auto& kb : b.kraus) {
      sub.kraus.push_back(kernels::kron(ka, kb));
      terms.push_back(ProductTerm{ka, kb});
    }
  return QuantumOperation(BipartiteLabel{sA.input().dimA, sB.input().dimA}, {std::move(sub)},
                          OperationClass::Local, SeparableWitness{std::move(terms)});
}

QuantumOperation makeOneLocal(const QuantumOperation& sA, int dimB) {
  requireSingleParty(sA, "makeOneLocal");
  const ComplexMatrix idB = ComplexMatrix::Identity(dimB, dimB);
  std::vector<SubOperation> subops;
  SeparableWitness w;
  for (const auto& s : sA.subops()) {
    SubOperation sub{{}, BipartiteLabel{s.output.dimA, dimB}};
    std::vector<ProductTerm> terms;
    for (const auto& k : s.kraus) {
      sub.kraus.push_back(kernels::kron(k, idB));
      terms.push_back(ProductTerm{k, idB});
    }
    subops.push_back(std::move(sub));
    w.push_back(std::move(terms));
  }
  return QuantumOperation(BipartiteLabel{sA.input().dimA, dimB}, std::move(subops),
                          OperationClass::OneLocal, std::move(w));
}

QuantumOperation makeOneLocalFromB(int dimA, const QuantumOperation& sB) {
  requireSingleParty(sB, "makeOneLocalFromB");
  const ComplexMatrix idA = ComplexMatrix::Identity(dimA, dimA);
  std::vector<SubOperation> subops;
  SeparableWitness w;
  for (const auto& s : sB.subops()) {
    SubOperation sub{{}, BipartiteLabel{dimA, s.output.dimA}};
    std::vector<ProductTerm> terms;
    for (const auto& k : s.kraus) {
      sub.kraus.push_back(kernels::kron(idA, k));
      terms.push_back(ProductTerm{idA, k});
    }
    subops.push_back(std::move(sub));
    w.push_back(std::move(terms));
  }
  return QuantumOperation(BipartiteLabel{dimA, sB.input().dimA}, std::move(subops),
                          OperationClass::TwoLocal, std::move(w));
}

QuantumOperation replaceWithState(BipartiteLabel input, const DensityOperator& state) {
  const BipartiteLabel out = state.bipartite();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(state.matrix());
  const int din = input.total();
  SubOperation sub{{}, out};
  for (Eigen::Index m = 0; m < eig.eigenvalues().size(); ++m) {
    const double lambda = eig.eigenvalues()(m);
    if (lambda <= 1e-14) continue;
    const ComplexVector psi = eig.eigenvectors().col(m) * std::sqrt(lambda);
    for (int i = 0; i < din; ++i) {
      ComplexMatrix k = ComplexMatrix::Zero(out.total(), din);
      k.col(i) = psi;
      sub.kraus.push_back(std::move(k));
    }
  }
  return QuantumOperation(input, {std::move(sub)}, OperationClass::Unclassified);
}

}  // namespace distill
