"""Prompt templates for the evaluated model and the judge roles.

Templates are plain str.format strings, so a named field substitutes at
every occurrence. Tests pin the exact wording; edit with care, since the
judge-parsing rules in the verification module key off these texts.
"""

from __future__ import annotations

SYSTEM_PROMPT = (
    "Answer questions about specific entities. If you recognise the focal entity, "
    "give a clear, detailed response covering all requested details. If you do not "
    "know it well enough, state that you cannot answer."
)

QUESTION_TEMPLATE = (
    "Please provide a brief overview of {entity_name} {supplementary_context}. "
    "Your response should be around 200 words long and must include key details "
    "such as {relation_1}, {relation_2}, and {relation_3}. Focus exclusively on "
    "the most relevant entity associated with the provided name."
)

ABSTENTION_PROMPT = (
    "You are given a question and a response from a language model. Determine if "
    "the response abstains from answering the question. A response counts as "
    "abstaining if it refuses, deflects, or avoids providing the requested "
    "information, or if it only gives generic disclaimers without including the "
    "required details. If the response meaningfully answers the question, "
    "classify it as 'Answered'.\n"
    "\n"
    "Return only one word: 'Abstained' or 'Answered'.\n"
    "\n"
    "### Question: {question}\n"
    "\n"
    "### Response: {response}"
)

TRANSLATOR_PROMPT = (
    "Convert the following structured tuple into a natural language sentence, "
    "using the {entity_name} as the subject: ({entity_name} ({entity_type}) , "
    "{relation} , {verb} , {fact}). Return only the resulting sentence and do "
    "not reword {entity_name} or {fact}."
)

LLM_ENTAILMENT_PROMPT = (
    "You are a fact-checking assistant. Your task is to determine whether the "
    "following fact is explicitly stated, supported, contradicted, or not "
    "mentioned in the provided response.\n"
    "\n"
    "### Response:\n"
    "{response}\n"
    "\n"
    "### Fact:\n"
    "{golden_fact}\n"
    "\n"
    "### Response Options:\n"
    "Respond with one of the following options and a brief explanation:\n"
    "\n"
    "- EXPLICITLY STATED: The fact is directly and clearly stated in the "
    "response, using the same or equivalent wording. Numerical or time-related "
    "facts must match exactly.\n"
    "- CONTRADICTED: The fact is directly contradicted by information in the "
    "response.\n"
    "- NOT MENTIONED: The fact is not present in the response, and there is no "
    "sufficient evidence to confirm or contradict it.\n"
    "\n"
    "Only return one of the four options and a single concise explanation. Do "
    "not provide additional commentary."
)

EXPERT_PROMPT = (
    "You are a fact-checking assistant. Your task is to determine whether "
    "Expert 1 or Expert 2 is correct based on the provided response and fact.\n"
    "\n"
    "### Response:\n"
    "{response}\n"
    "\n"
    "### Fact:\n"
    "{golden_fact}\n"
    "\n"
    "Expert 1: Entailment (The response aligns with the fact.)\n"
    "Expert 2: Contradiction (The response contradicts the fact.)\n"
    "\n"
    'Return only "Expert 1" or "Expert 2" based on the correct evaluation. '
    "No explanations."
)
