'''
Command line entry point for the analyses, for example:

    > python manage.py bounds 3 3 2 1
    > python manage.py analyze corpus/goldberg_w2.json --p 1
    > python manage.py curvature corpus/template_lambda_half.json --p 2

Exit codes: 0 ok, 1 invalid input or unmet precondition, 2 negative verdict,
3 parse error.
'''

from flask.cli import FlaskGroup

from main import app

cli = FlaskGroup(create_app=lambda: app, add_default_commands=False,
                 help='Rank analysis of webs of foliations.')

if __name__ == "__main__":
    cli()
