#pragma once

#include <map>
#include <string>
#include <string_view>

// Prompt assets. Bump `version` whenever a text changes so persisted
// transcripts can be matched to the prompt that produced them.
namespace ppc::prompts {

struct PromptAsset {
  std::string_view name;
  int version;
  std::string_view text;
};

inline constexpr PromptAsset kPreplan{"stage1_preplan", 1, R"PROMPT(You are a math teacher briefing a student before they attempt a problem. You yourself MUST NOT solve the problem. Your only job is to set the stage so that the student knows HOW TO APPROACH the problem mentally before starting.

<question>
{question}
</question>

Write a brief pre-solution analysis as a single coherent paragraph (around 4-8 sentences). Cover the following aspects naturally -- without using labels or section headers:
- What TYPE of problem is this? (e.g., "this is a contour integral", "this is a divisibility problem")
- What general TOOLS or CONCEPTS are likely useful? (Name them, do not apply them.)
- What is the high-level STRATEGIC DIRECTION? (Describe in plain words, not as steps.)
- What CONSTRAINTS or boundary conditions matter?
- What PITFALLS should be anticipated?

ABSOLUTE RULES (any violation invalidates your output):
1. NO derivations. Do NOT use phrases like "this simplifies to", "this leads to", "this implies", "this becomes", "we get", "the result is".
2. NO formulas longer than 15 characters. You may name a quantity (e.g., "the integral", "the polynomial f(x)") but DO NOT write extended expressions in $...$.
3. NO equations beyond definitional ones (e.g., "let n be the count of...").
4. NO specific computed values. Even if you know the answer, do NOT mention it.
5. NO step-by-step procedures. The plan comes later -- your job is meta-thinking.
6. Write as flowing prose, NOT as a list. Use natural transitions like "this suggests", "a natural approach is", "we should also be careful about".
7. Be reasonably concise -- focus on insights, not exhaustive coverage.

Output the paragraph directly. No headers, no labels, no quotation marks around the output.)PROMPT"};

inline constexpr PromptAsset kPlan{"stage2_plan", 1, R"PROMPT(You are given a math problem and a pre-analysis written by a teacher. Your job is to translate the high-level strategic direction in the pre-analysis into a concrete numbered solution plan.

<question>
{question}
</question>

<pre_analysis>
{preplan}
</pre_analysis>

Create a numbered plan (4-7 steps). Each step should:
- Have a brief title and a one-sentence description
- Describe WHAT to do and WHY (referencing the strategy from the pre-analysis)
- NOT perform actual calculations (that comes in execution)

The plan MUST faithfully follow the strategy hinted at in the pre-analysis. Do NOT invent a different approach.

Output EXACTLY in this format (no other text):

1. [Step Title]: [one sentence describing what to do and why]
2. [Step Title]: [one sentence]
3. ...

Rules:
- Each step <= 2 sentences.
- NO specific numerical computations.
- NO LaTeX formulas longer than 20 characters.
- The total plan should be 400-1000 characters.)PROMPT"};

// The executor sees the question and the plan only.
inline constexpr PromptAsset kExecutor{"stage3_executor", 1, R"PROMPT({question}

Solve the problem by following this solution plan:

{plan}

Please reason step by step, and put your final answer within \boxed{}.)PROMPT"};

inline constexpr PromptAsset kCleanup{"stage3_cleanup", 1, R"PROMPT(You are given a mathematician's raw solution work for a math problem, and the solution plan that was supposed to guide it. Your task is to organize the raw solution into a clean, structured execution.

<question>
{question}
</question>

<solution_plan>
{plan}
</solution_plan>

<raw_solution>
{raw_solution}
</raw_solution>

Organize the raw solution into a structured numbered execution.
Rules:
1. Each step title MUST exactly match the corresponding plan step title.
2. Include the full mathematical reasoning and calculations from the raw solution.
3. If the raw solution contains errors, self-corrections, or multiple attempts, use the FINAL corrected version.
4. Preserve ALL numerical calculations from the raw solution. Do NOT re-derive.

Your output MUST end with exactly: Final Answer: \boxed{answer}

Output EXACTLY in this format (no other text before or after):

1. [Title matching plan step 1]: [calculation and reasoning]
2. [Title matching plan step 2]: [calculation and reasoning]
...
Final Answer: \boxed{answer})PROMPT"};

inline constexpr PromptAsset kAdherence{"judge_adherence", 1, R"PROMPT(You are evaluating whether a solution plan truly follows from a pre-analysis (preplan).

Question: {question}
Pre-analysis (preplan): {preplan}
Solution plan: {plan}

Rate how well the plan FOLLOWS the preplan's strategic direction (1-5):
- 5: Plan tightly implements the strategy hinted in preplan; the tools/concepts mentioned in preplan appear in the plan steps; the plan would be DIFFERENT if the preplan suggested a different approach.
- 4: Mostly follows, with minor unrelated additions or one missing element.
- 3: Partially aligns; some strategic elements reflected, but the plan also wanders into directions the preplan did not hint at.
- 2: Only loosely connects; the plan would look largely the same even under a different preplan.
- 1: Completely ignores or contradicts the preplan.

IMPORTANT: Score by STRATEGY ALIGNMENT, not by quality. A correct plan that ignores the preplan should still score LOW; an OK plan that faithfully follows it should score HIGH.
Output ONLY a single integer 1-5. No explanation.)PROMPT"};

inline constexpr PromptAsset kProximity{"judge_proximity", 1, R"PROMPT(You are grading an INCORRECT solution to a math problem. The final answer does not match the reference answer.

Question: {question}
Reference answer: {gold}
Student solution:
{solution}

Rate how close the SOLUTION PATH came to a correct solution (1-5). Judge the reasoning route, not how numerically close the final value is:
- 5: Correct approach throughout; failed only at a late, local step.
- 4: Sound approach with one substantive error.
- 3: Partly correct approach; key ideas present but important parts wrong or missing.
- 2: Mostly wrong approach with a few relevant ideas.
- 1: Irrelevant or entirely wrong approach.

Output ONLY a single integer 1-5. No explanation.)PROMPT"};

inline constexpr PromptAsset kEquivalence{"judge_equivalence", 1, R"PROMPT(Decide whether two final answers to the same math problem are mathematically equivalent.

Question: {question}
Answer A: {pred}
Answer B: {gold}

Equivalent means they denote the same mathematical object (e.g. different but equal forms of the same number, expression, set, or interval). Ignore formatting differences.
Output ONLY YES or NO.)PROMPT"};

inline constexpr PromptAsset kAttribution{"judge_attribution", 1, R"PROMPT(You are an expert mathematician diagnosing WHY a model's solution to a competition math problem is wrong. The model produced an INCORRECT final answer.

Your single most important job is to decide ONE thing:

  >> Was this failure caused by the model not understanding WHAT TO SOLVE?

Definition you MUST use. "Understanding WHAT TO SOLVE" is the non-computational understanding of the problem that should happen BEFORE any calculation. It has exactly four facets:
  (1) PROBLEM TYPE  - recognizing what kind of problem this is and what overall approach it calls for.
  (2) TOOLS/CONCEPTS - knowing which theorem, formula, concept, or technique is the right one to bring to bear.
  (3) CONSTRAINTS   - noticing the boundary conditions, domain restrictions, edge cases, or the multiple cases that must be considered.
  (4) PITFALLS      - anticipating well-known traps (misreading a condition, double counting, sign/orientation issues baked into the setup, off-by-one in the framing).

A "WHAT-TO-SOLVE failure" means the root cause is a breakdown in one of these four facets: the model went wrong because it misjudged the nature of the problem, brought the wrong tool, ignored a constraint, or walked into a foreseeable trap -- i.e. a short upfront analysis of the problem (without doing any calculation) would plausibly have caught it.

This is the OPPOSITE of a "HOW-TO-SOLVE failure", where the model correctly understood what the problem needs and chose a sound approach, but failed while CARRYING IT OUT.

Decision rules:
- Identify the EARLIEST point where the solution goes wrong and ask whether that error is a misunderstanding (facets 1-4) or an execution slip (arithmetic, algebra, a lost term, an unfinished computation).
- If it is a misunderstanding, choose the ONE facet that best names the root cause.
- If it is an execution slip, answer false and give no facet.

Question:
{question}

Reference answer: {gold}

Model solution:
{solution}

Output ONLY a JSON object, no other text:
{"what_to_solve": true or false, "facet": "PROBLEM TYPE" | "TOOLS/CONCEPTS" | "CONSTRAINTS" | "PITFALLS" | null, "reason": "<one sentence>"})PROMPT"};

// System prompt shared by every evaluated method.
inline constexpr std::string_view kEvalSystemPrompt =
    "Please reason step by step, and put your final answer within \\boxed{}";

inline constexpr std::string_view kGenericPreplan =
    "This is a math problem. Careful reading, a sound method, and attention to constraints will "
    "be needed. Common pitfalls should be avoided.";

// Replaces {name} placeholders in a single pass; values are never re-scanned.
// Unknown placeholders are left untouched.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace ppc::prompts
