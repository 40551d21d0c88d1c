"""Prompt catalog: every template the pipeline sends, in one place.

Each template opens with a stage marker line (e.g. ``### COLUMN-BATCH users``)
that scripted test providers key on and the prompt-dump debug flag preserves.
The expected reply shape is stated inside each template; stage parsers in the
engines enforce it. Templates are this artifact's own wording.
"""

from __future__ import annotations

COLUMN_BATCH = """### COLUMN-BATCH {table} block={ordinal}
You are documenting database columns for data analysts.
Database: {database}
Table: {table}
Relevant domain terms:
{terms}
Columns (name | declared type | sample values):
{columns}
Think step by step: for each column consider its name, declared type, sample
values, and any matching domain term, then write one clear sentence.
Reply with a JSON object mapping every column name to its description.
"""

TABLE_BLOCK = """### TABLE-BLOCK {table} block={ordinal}
Summarize what this part of table {table} stores, using its column
descriptions below.
{summaries}
Reply with one concise paragraph of plain text.
"""

TABLE_REDUCE = """### TABLE-REDUCE {table}
Merge the following partial descriptions of table {table} into one
coherent description. Keep every distinct fact; remove repetition.
{entries}
Reply with one paragraph of plain text.
"""

TABLE_PROFILE = """### TABLE-PROFILE {table}
Table: {table}
Description: {description}
Columns: {columns}
Declared key columns: {declared_keys}
Work through these steps:
1. List candidate primary keys, then choose the single most likely one.
2. Identify at most five key attributes central to the table's purpose.
3. Classify the table type as exactly one of: dimension, bridge, fact.
4. Name the main entity this table is about.
5. Write a short natural-language description for end users.
Reply with JSON: {{"chosen_primary_key": "...", "key_attributes": ["..."],
"table_type": "...", "main_entity": "...", "nl_description": "..."}}
"""

TABLE_PROFILE_RETRY = """### TABLE-PROFILE-RETRY {table}
Your previous profile listed {count} key attributes; the maximum is five.
Previous reply: {previous}
Return the same JSON object with at most five key_attributes, keeping the
most important ones.
"""

TABLE_RELATIONSHIPS = """### TABLE-RELATIONSHIPS {table}
Identify referential-integrity relationships between table {table} and the
candidate tables below.
Table {table} columns: {columns}
Candidate tables:
{candidates}
For each real relationship give: the referencing table, the referenced table,
the foreign key column, the primary key column, and the relationship type
(1:1 or 1:N). Only report relationships you can justify from the columns.
Reply with a JSON list:
[{{"referencing_table": "...", "referenced_table": "...",
"foreign_key_column": "...", "primary_key_column": "...",
"relationship_type": "1:N"}}]
Reply [] when there are none.
"""

ENTITY_EXTRACTION = """### ENTITY-EXTRACTION {database}
The most-connected tables of database {database} and their summaries:
{candidates}
Infer the larger business entities these tables form. For each entity:
1. A name that represents the grouped tables and reflects their theme.
2. A summary of its purpose and the insight it contributes to understanding
   the data source.
3. Key attributes, drawn only from the grouped tables' key attributes.
4. The list of member table names.
Reply with a JSON list:
[{{"name": "...", "summary": "...", "key_attributes": ["..."],
"member_tables": ["..."]}}]
"""

DATABASE_SUMMARY = """### DATABASE-SUMMARY {database}
Context about database {database}:
{context}
Reply with a JSON object containing exactly these fields:
- "purpose": the purpose of the data source, without entity details.
- "domain": the domain of the data source.
- "business_impact": in simple terms, how it aids operations, analytics, or
  decision making.
- "real_world_example": a real-world scenario where it plays a pivotal role.
- "user_friendly_description": combine the previous answers into a
  user-friendly description; do not emphasize what it includes.
- "short_summary": a summary of the data source based on the user-friendly
  description, highlighting key points, in no more than 10 words.
"""

DATABASE_SUMMARY_RETRY = """### DATABASE-SUMMARY-RETRY {database}
Your short_summary was {count} words; the limit is 10 words.
Previous reply: {previous}
Return the same JSON object with short_summary rewritten in 10 words or fewer.
"""

SUGGESTED_QUESTIONS = """### SUGGESTED-QUESTIONS {database}
Database summary:
{summary}
Entities:
{entities}
Propose exploratory analysis questions a user could ask of this database.
Cover every one of these analysis types at least once: descriptive,
inferential, diagnostic, predictive, prescriptive.
Reply with a JSON list: [{{"text": "...", "analysis_type": "..."}}]
"""

SUGGESTED_QUESTIONS_RETRY = """### SUGGESTED-QUESTIONS-RETRY {database}
Your list was missing these analysis types: {missing}.
Reply with a JSON list of additional questions covering exactly the missing
types: [{{"text": "...", "analysis_type": "..."}}]
"""

CLARIFY = """### CLARIFY
User question: {question}
Database context:
{context}
Relevant domain terms:
{terms}
Work through these steps:
1. Identify the main concepts or variables the question mentions.
2. Check each concept for ambiguity against the database context.
3. Generate an explanation for each unclear concept, grounded in the context.
4. Refine the task so it communicates the intended outcome and resolves the
   ambiguities; expand any domain abbreviations using the terms above.
5. Provide a detailed description of the refined task: objective, expected
   outcome, and relevant considerations.
Reply with JSON: {{"main_concepts": ["..."], "ambiguities":
[{{"concept": "...", "explanation": "..."}}], "refined_task": "...",
"detailed_description": "..."}}
"""

DECOMPOSE = """### DECOMPOSE
Refined task: {refined_task}
Details: {detailed_description}
{sop_block}{fewshot_block}First decide whether one SQL statement can answer the task. If not, break it
into ordered sub-questions, each with a detailed description.
Reply with JSON: {{"single_sql_answerable": true/false, "subtasks":
[{{"description": "...", "detail": "..."}}]}}
subtasks must be an empty list when single_sql_answerable is true.
"""

SCHEMA_FILTER = """### SCHEMA-FILTER block={ordinal}
Task: {task}
Candidate tables in this group, with their summaries and columns:
{block}
Select only the tables and, within them, only the columns necessary to answer
the task. Think about which columns the SQL would reference.
Reply with a JSON list: [{{"table": "...", "columns": ["..."]}}]
Reply [] if nothing in this group is relevant.
"""

SQL_GENERATE = """### SQL-GENERATE
Task: {task}
Details: {detail}
Available schema (table.column : type):
{subset}
{fewshots}{prior}Work through these steps:
1. Identify the keywords in the task that relate to tables and columns.
2. Map each keyword to the specific columns and tables above.
3. Generate one SQL query that satisfies the task using those mappings and
   the table relationships. If no SQL query can be generated, leave the
   output empty.
4. Rewrite the query: use the table.column format to prevent ambiguity when
   multiple tables are included, verify every reference is correct, and
   enclose all table and column names in backticks.
Reply with the SQL statement only - no prose, no code fences. Reply with
nothing if the task cannot be answered.
"""

SQL_GENERATE_RETRY = """### SQL-GENERATE-RETRY
Your SQL referenced identifiers that are not in the allowed schema subset:
{bad_refs}
Allowed schema (table.column : type):
{subset}
Previous SQL: {previous}
Regenerate the SQL using only the allowed tables and columns. Reply with the
SQL statement only.
"""

SQL_REPAIR = """### SQL-REPAIR stage={stage}
The SQL statement below failed during the {stage} check.
SQL: {sql}
Error ({error_class}): {error_text}
Rewrite the statement to fix this error while preserving the intent.
Reply with the SQL statement only - no prose, no code fences.
"""

CHART_VERIFY = """### CHART-VERIFY
Task: {task}
Result columns: {columns}
Proposed chart: {proposal}
Available alternatives: {alternatives}
Verify whether the proposed chart type is appropriate for presenting this
result. If it is not, pick a suitable type from the alternatives.
Reply with JSON: {{"appropriate": true/false, "alternative": null or "type"}}
"""

CATALOG = {
    "column_batch": COLUMN_BATCH,
    "table_block": TABLE_BLOCK,
    "table_reduce": TABLE_REDUCE,
    "table_profile": TABLE_PROFILE,
    "table_profile_retry": TABLE_PROFILE_RETRY,
    "table_relationships": TABLE_RELATIONSHIPS,
    "entity_extraction": ENTITY_EXTRACTION,
    "database_summary": DATABASE_SUMMARY,
    "database_summary_retry": DATABASE_SUMMARY_RETRY,
    "suggested_questions": SUGGESTED_QUESTIONS,
    "suggested_questions_retry": SUGGESTED_QUESTIONS_RETRY,
    "clarify": CLARIFY,
    "decompose": DECOMPOSE,
    "schema_filter": SCHEMA_FILTER,
    "sql_generate": SQL_GENERATE,
    "sql_generate_retry": SQL_GENERATE_RETRY,
    "sql_repair": SQL_REPAIR,
    "chart_verify": CHART_VERIFY,
}
