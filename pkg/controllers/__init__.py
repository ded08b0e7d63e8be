'''
Analyses built on the web model: rank bounds (combinat), jet matrices (jets),
ordinarity and relation checks (analysis) and the tautological connection
(connection). Commands in scripts/web_commands.py call into these modules.
'''
